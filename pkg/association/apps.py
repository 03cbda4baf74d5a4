from django.apps import AppConfig


class AssociationConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'association'
    verbose_name = 'Genetic association screening'

from django.apps import AppConfig


class SieveConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'sieve'
    verbose_name = 'Sieve maximum likelihood'

    # Override the ready method to import signals
    def ready(self):
        import sieve.signals.handlers

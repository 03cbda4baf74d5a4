from django.dispatch import Signal

# Sent with `result` (a FitResult) whenever fit_joint finishes.
fit_completed = Signal()

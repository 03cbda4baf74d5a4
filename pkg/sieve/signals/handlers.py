import logging

from django.dispatch import receiver

from . import fit_completed

logger = logging.getLogger('sieve')


@receiver(fit_completed)
def log_fit_summary(sender, **kwargs):
    result = kwargs['result']
    copula = result.copula
    level = logging.INFO if result.converged else logging.WARNING
    logger.log(
        level,
        'fit %s: loglik=%.6f aic=%.3f alpha=%.4f kappa=%.4f tau=%.4f iterations=%d converged=%s%s',
        result.data_fingerprint[:12], result.loglik, result.aic, copula.alpha, copula.kappa,
        copula.tau, result.iterations, result.converged,
        ' (alpha on boundary)' if result.alpha_at_boundary else '',
    )

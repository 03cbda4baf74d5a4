import math

from scipy import special

from core.exceptions import DomainError


def chisq_sf(x, df):
    """Upper tail of the chi-square distribution, Q(df / 2, x / 2)."""
    if isinstance(df, bool) or int(df) != df or df < 1:
        raise DomainError(f'degrees of freedom must be a positive integer, got {df!r}')
    if math.isnan(x) or x < 0:
        raise DomainError(f'chi-square statistic must be >= 0, got {x!r}')
    if math.isinf(x):
        return 0.0
    return float(special.gammaincc(df / 2.0, x / 2.0))

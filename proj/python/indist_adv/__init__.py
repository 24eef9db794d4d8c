"""Search for adversarial examples inside a known training distribution."""

from ._indist import *  # noqa: F401,F403
from ._indist import __doc__  # noqa: F401

from ._faqai import *  # noqa: F401,F403
from ._faqai import __doc__  # noqa: F401

# Data models
from .exception import *

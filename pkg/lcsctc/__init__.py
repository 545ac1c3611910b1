# -*- coding: utf-8 -*-

# Copyright (c) 2025, lcsctc developers. The MIT License (MIT).

from .pckg_info import version

from .errors import *
from .phonemes import *
from .segmentation import *
from .matrix import *
from .cost import *
from .align import *
from .ctc import *
from .metrics import *
from .toy import *

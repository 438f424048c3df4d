#
# geoconvex
#

__title__ = 'geoconvex'
__version__ = '0.3.0'
__license__ = 'Simplified MIT License'

"""Program units.

Lengths are measured in units of the stack design wavelength and angular
frequencies in units of the design frequency, so that ``lambda0 = 1`` and
``omega0 = 2*pi*c/lambda0 = 1``.  The speed of light is then ``1/(2*pi)``.
Time is measured in units of ``1/omega0``.  ``hbar`` and ``eps0`` are set to
one; dipole moments and the transverse mode area are free user inputs, so
coupling rates come out in scaled units (see README for SI conversion).
"""

import math

SPEED_OF_LIGHT = 1.0 / (2.0 * math.pi)
HBAR = 1.0
EPS0 = 1.0
OMEGA0 = 1.0
LAMBDA0 = 1.0

"""Co-prime optical phased-array transceiver simulation and design tools."""

from .drive import (DriveSchedule, ShifterTrace, ThermalParams, driver_count, phase_ripple,
                    schedule_from_phases, schedule_from_turns, simulate_thermal)
from .element import ISOTROPIC, ElementPattern, element_amplitude, element_power
from .farfield import (DirectionGrid, FieldPattern, PhaseMap, PowerPattern, aperture_pattern,
                       array_factor, cross_section, power_pattern, transceiver_pattern)
from .geometry import (ArrayGeometry, CoprimeSpec, RoutingModel, grating_lobe_spacing,
                       make_coprime_pair, make_uniform_grid, routing_limited_pitch,
                       validate_coprime)
from .metrics import (NO_SIDE_LOBES, BeamMetrics, beam_metrics, beamwidth_3db, find_lobes,
                      peak_direction, resolvable_spots, side_lobe_level, sll_vs_k)
from .steering import (OptimizerConfig, SteerTarget, co_align, optimize_phases, pixel_grid,
                       steering_phases)

__version__ = "0.1.0"

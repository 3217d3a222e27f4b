"""Cauchy-Stieltjes kernel families: transforms, iteration and extensions."""

from .errors import (CskError, DomainError, NoExtensionError, NumericalError,
                     QuadratureError, SpecError)
from .extend import (ExtendedFamily, ExtendedMember, atom_weight,
                     companion_mean_map, extend_family, extended_member,
                     extended_pseudo_variance, first_extension_bound,
                     free_power_bound, second_extension_bound)
from .family import (CskFamily, PseudoVariance, build_family, member,
                     pseudo_variance, two_sided_domain, variance, z_of_m)
from .iterate import (IteratedFamily, aw_integral, cubic_closed_forms,
                      iterate_family, iterated_domain, iterated_m_transform,
                      iterated_mean, iterated_pseudo_variance, iterated_variance,
                      mean_map, mean_map_inverse, quadratic_closed_forms)
from .measures import (CATALOG, Law, Measure, evaluate_density, law_from_spec,
                       support_bounds)
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate
from .transforms import (ThetaDomain, cauchy_transform, m_transform,
                         mean_function, theta_domain)
from .verify import VerificationReport, verify

#ifndef DIAGOSC_DIAGOSC_HPP
#define DIAGOSC_DIAGOSC_HPP

#include "diagosc/basis.hpp"
#include "diagosc/dynamics.hpp"
#include "diagosc/errors.hpp"
#include "diagosc/interaction.hpp"
#include "diagosc/modes.hpp"
#include "diagosc/ode.hpp"
#include "diagosc/parallel.hpp"
#include "diagosc/periodic_function.hpp"
#include "diagosc/quadrature.hpp"
#include "diagosc/random.hpp"
#include "diagosc/random_basis.hpp"
#include "diagosc/statistics.hpp"
#include "diagosc/stochastic.hpp"

#endif  // DIAGOSC_DIAGOSC_HPP

#pragma once

#include "starkmbl/chain.hpp"
#include "starkmbl/couplings.hpp"
#include "starkmbl/errors.hpp"
#include "starkmbl/fields.hpp"
#include "starkmbl/io.hpp"
#include "starkmbl/krylov.hpp"
#include "starkmbl/noise.hpp"
#include "starkmbl/observables.hpp"
#include "starkmbl/operators.hpp"
#include "starkmbl/protocols.hpp"
#include "starkmbl/rotations.hpp"
#include "starkmbl/spectrum.hpp"
#include "starkmbl/sweff.hpp"
#include "starkmbl/trotter.hpp"

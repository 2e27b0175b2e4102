#pragma once

#include "llrelax/commands.hpp"
#include "llrelax/constants.hpp"
#include "llrelax/errors.hpp"
#include "llrelax/fields.hpp"
#include "llrelax/homogeneous.hpp"
#include "llrelax/legendre.hpp"
#include "llrelax/observables.hpp"
#include "llrelax/oracle.hpp"
#include "llrelax/params.hpp"
#include "llrelax/quadrature.hpp"
#include "llrelax/rng.hpp"
#include "llrelax/scenario.hpp"
#include "llrelax/table.hpp"
#include "llrelax/trapped.hpp"

#pragma once

#include "typeiii/errors.hpp"
#include "typeiii/bigint.hpp"
#include "typeiii/real.hpp"
#include "typeiii/interval.hpp"
#include "typeiii/ledger.hpp"
#include "typeiii/cylinder.hpp"
#include "typeiii/measure.hpp"
#include "typeiii/cocycle.hpp"
#include "typeiii/rng.hpp"
#include "typeiii/montecarlo.hpp"
#include "typeiii/oracle.hpp"
#include "typeiii/evc.hpp"
#include "typeiii/verify.hpp"

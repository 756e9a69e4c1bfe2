#pragma once

#include "stepvol/csv.hpp"
#include "stepvol/ffbs.hpp"
#include "stepvol/gibbs.hpp"
#include "stepvol/ingest.hpp"
#include "stepvol/model.hpp"
#include "stepvol/rng.hpp"
#include "stepvol/simulate.hpp"

#pragma once

#include "polyconsensus/affine.hpp"
#include "polyconsensus/config.hpp"
#include "polyconsensus/dynamics.hpp"
#include "polyconsensus/error.hpp"
#include "polyconsensus/jacobi.hpp"
#include "polyconsensus/lmi.hpp"
#include "polyconsensus/models.hpp"
#include "polyconsensus/pattern.hpp"
#include "polyconsensus/pipeline.hpp"
#include "polyconsensus/polybasis.hpp"
#include "polyconsensus/sdp.hpp"
#include "polyconsensus/sdpa.hpp"

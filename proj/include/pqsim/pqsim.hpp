#pragma once

#include "pqsim/config.hpp"
#include "pqsim/error.hpp"
#include "pqsim/field.hpp"
#include "pqsim/fourier.hpp"
#include "pqsim/grid.hpp"
#include "pqsim/io.hpp"
#include "pqsim/optics.hpp"
#include "pqsim/packet.hpp"
#include "pqsim/parallel.hpp"
#include "pqsim/potential.hpp"
#include "pqsim/runner.hpp"
#include "pqsim/scattering.hpp"
#include "pqsim/split_operator.hpp"

#pragma once

#include "tensor_algebra.hpp"
#include "signature.hpp"
#include "sig_operators.hpp"
#include "powerseries.hpp"
#include "schemes.hpp"
#include "montecarlo.hpp"
#include "io.hpp"

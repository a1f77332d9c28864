#pragma once

#include "vpfit/error.hpp"
#include "vpfit/basis.hpp"
#include "vpfit/dft.hpp"
#include "vpfit/varpro.hpp"
#include "vpfit/optimizer.hpp"
#include "vpfit/analysis.hpp"

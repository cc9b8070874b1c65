#pragma once

#include "dprec/units.hpp"
#include "dprec/quadrature.hpp"
#include "dprec/spectral.hpp"
#include "dprec/waveform.hpp"
#include "dprec/attenuation.hpp"
#include "dprec/lambert_w.hpp"
#include "dprec/scalar_min.hpp"
#include "dprec/fisher.hpp"
#include "dprec/parallel.hpp"
#include "dprec/optimizer.hpp"
#include "dprec/mc.hpp"

#pragma once

#include "vwm/attacks.hpp"
#include "vwm/error.hpp"
#include "vwm/motion.hpp"
#include "vwm/pipeline.hpp"
#include "vwm/plane.hpp"
#include "vwm/synthetic.hpp"
#include "vwm/video_io.hpp"
#include "vwm/watermark.hpp"
#include "vwm/wavelet.hpp"

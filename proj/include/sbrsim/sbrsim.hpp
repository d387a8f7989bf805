// sbrsim.hpp — umbrella header for the whole library.
#pragma once

#include "sbrsim/accel.hpp"
#include "sbrsim/annotate.hpp"
#include "sbrsim/config.hpp"
#include "sbrsim/fft.hpp"
#include "sbrsim/io.hpp"
#include "sbrsim/pipeline.hpp"
#include "sbrsim/replay.hpp"
#include "sbrsim/scene.hpp"
#include "sbrsim/signal.hpp"
#include "sbrsim/tracer.hpp"
#include "sbrsim/util.hpp"
#include "sbrsim/vec.hpp"

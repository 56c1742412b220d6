#pragma once

// Umbrella header.

#include "sublinear/dataset.hpp"
#include "sublinear/errors.hpp"
#include "sublinear/graph.hpp"
#include "sublinear/gxl.hpp"
#include "sublinear/jsonl.hpp"
#include "sublinear/learning.hpp"
#include "sublinear/matching.hpp"
#include "sublinear/model.hpp"
#include "sublinear/model_io.hpp"
#include "sublinear/protocol.hpp"
#include "sublinear/rng.hpp"
#include "sublinear/synthetic.hpp"

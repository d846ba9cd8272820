#pragma once

#include "core/ops_conv.hpp"
#include "core/ops_elementwise.hpp"
#include "core/ops_linalg.hpp"
#include "core/ops_reduce.hpp"
#include "core/ops_resize.hpp"
#include "core/ops_scan.hpp"
#include "core/ops_segment.hpp"
#include "core/ops_shape.hpp"

#pragma once

#include "content.hpp"
#include "denoise.hpp"
#include "errors.hpp"
#include "filters.hpp"
#include "greedy.hpp"
#include "image.hpp"
#include "io.hpp"
#include "matrix.hpp"
#include "packet_tree.hpp"
#include "psd.hpp"
#include "random.hpp"
#include "report.hpp"

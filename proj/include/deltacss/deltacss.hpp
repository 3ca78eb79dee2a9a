#pragma once

#include "deltacss/errors.hpp"
#include "deltacss/linalg.hpp"
#include "deltacss/mechanism.hpp"
#include "deltacss/symmetry.hpp"
#include "deltacss/sampling.hpp"
#include "deltacss/catalog.hpp"
#include "deltacss/geometry.hpp"
#include "deltacss/witness.hpp"
#include "deltacss/classification.hpp"
#include "deltacss/curve.hpp"
#include "deltacss/io.hpp"

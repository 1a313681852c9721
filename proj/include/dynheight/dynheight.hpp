#pragma once

#include "dynheight/canonical.hpp"
#include "dynheight/dynsys.hpp"
#include "dynheight/error.hpp"
#include "dynheight/exactnum.hpp"
#include "dynheight/family.hpp"
#include "dynheight/fibral.hpp"
#include "dynheight/io.hpp"
#include "dynheight/linalg.hpp"
#include "dynheight/polyparse.hpp"
#include "dynheight/projective.hpp"
#include "dynheight/random.hpp"
#include "dynheight/upoly.hpp"

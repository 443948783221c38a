#ifndef SUBDYN_SUBDYN_HPP
#define SUBDYN_SUBDYN_HPP

#include "error.hpp"
#include "geometry.hpp"
#include "highprec.hpp"
#include "linalg.hpp"
#include "nonauto.hpp"
#include "parallel.hpp"
#include "shadowing.hpp"
#include "shiftspace.hpp"
#include "spectrum.hpp"
#include "suspension.hpp"
#include "sweep.hpp"
#include "toral.hpp"

#endif

#ifndef LAGFREE_LAGFREE_HPP
#define LAGFREE_LAGFREE_HPP

#include "lagfree/cplx2.hpp"
#include "lagfree/disc_mesh.hpp"
#include "lagfree/domain.hpp"
#include "lagfree/error.hpp"
#include "lagfree/examples.hpp"
#include "lagfree/hamiltonians.hpp"
#include "lagfree/io.hpp"
#include "lagfree/residuals.hpp"
#include "lagfree/solver.hpp"

#endif  // LAGFREE_LAGFREE_HPP

#ifndef NULLCQA_NULLCQA_HPP
#define NULLCQA_NULLCQA_HPP

#include "nullcqa/error.hpp"
#include "nullcqa/value.hpp"
#include "nullcqa/relational.hpp"
#include "nullcqa/constraint.hpp"
#include "nullcqa/analysis.hpp"
#include "nullcqa/satisfaction.hpp"
#include "nullcqa/repair.hpp"
#include "nullcqa/program.hpp"
#include "nullcqa/compiler.hpp"
#include "nullcqa/solver.hpp"
#include "nullcqa/cqa.hpp"

#endif  // NULLCQA_NULLCQA_HPP

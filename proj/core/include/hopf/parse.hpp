#pragma once

#include <string>
#include <vector>

#include "hopf/germ.hpp"
#include "hopf/series.hpp"

namespace hopf {

// Expression grammar over variables z1..zn:
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := ('+' | '-')* power
//   power  := atom ('^' '-'? integer)?
//   atom   := number 'i'? | 'i' | variable | '(' expr ')'
// Numbers are decimal with optional fraction and exponent; a trailing 'i'
// (or a bare 'i') makes the literal imaginary. Products need an explicit '*'.
// Division requires the divisor to have a nonzero constant term.
TruncatedSeries parse_series(const std::string& text, int dimension, int cap);

// One expression per component; enforces zero constant terms and an
// invertible linear part.
MapGerm parse_germ(const std::vector<std::string>& expressions, int dimension, int cap);

}  // namespace hopf

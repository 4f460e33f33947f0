#pragma once

#include <stdexcept>
#include <string>

namespace hopf {

// Stable error taxonomy. Every domain failure thrown by this library derives
// from Error and carries one of these codes, so callers (and the CLI) can map
// outcomes without string-matching messages.
enum class ErrorCode {
    syntax,                 // malformed expression text
    non_germ,               // map has a nonzero constant term
    singular_linear_part,   // linear part not invertible
    dimension_mismatch,     // mixed dimensions or truncation caps
    capacity_exceeded,      // dimension/degree outside the packed-index range
    invalid_argument,       // other precondition violation
    not_contraction,        // some eigenvalue modulus >= 1 - 1e-12
    no_convergence,         // eigenvalue iteration failed
    resonant_input,         // multiplicative resonance blocks full linearization
    resonance_obstruction,  // graded connection solve hit an inconsistent unit weight
    not_flat,               // curvature above tolerance where flatness is required
    not_closed,             // one-form fails closedness where exactness is required
    rank_mismatch,          // operation needs bundle rank == base dimension
    singular_cocycle,       // bundle cocycle not invertible at the origin
    dimension_too_small,    // cohomology table needs n >= 3
    not_diagonal,           // section counting needs a diagonal linear part
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// Expression-text error with the offset (0-based) of the offending character.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& message, std::size_t position)
        : Error(ErrorCode::syntax, message + " (at offset " + std::to_string(position) + ")"),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

// Graded connection solve found a unit weight with a nonzero right-hand side
// in that direction; `degree` is the coefficient degree of the blocked block.
class ResonanceObstructionError : public Error {
public:
    ResonanceObstructionError(const std::string& message, int degree)
        : Error(ErrorCode::resonance_obstruction, message), degree_(degree) {}
    int degree() const { return degree_; }

private:
    int degree_;
};

}  // namespace hopf

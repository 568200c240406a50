#pragma once

#include <stdexcept>
#include <string>

namespace whlab {

// Error taxonomy shared by the library and mirrored by the CLI exit codes.
//
//   invalid_law_error / input_error / parameter_error / domain_error
//       -> user-facing validation problems (CLI exit 1)
//   factorisation_error
//       -> root classification or factor assembly failed (CLI exit 2)
//   normalisation_error
//       -> a factor pair is not a consistent positive scaling of a
//          probabilistic pair (uniqueness rejection, CLI exit 3)
//   precision_error / precondition_error
//       -> a check could not be run honestly at the requested truncation
//          or on the supplied regime
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class invalid_law_error : public error {
 public:
  using error::error;
};

class input_error : public error {
 public:
  using error::error;
};

class parameter_error : public error {
 public:
  using error::error;
};

class domain_error : public error {
 public:
  using error::error;
};

class factorisation_error : public error {
 public:
  using error::error;
};

class normalisation_error : public error {
 public:
  using error::error;
};

class precision_error : public error {
 public:
  using error::error;
};

class precondition_error : public error {
 public:
  using error::error;
};

}  // namespace whlab

#pragma once

#include <iosfwd>
#include <string>

#include "reid/matrix.hpp"

namespace reid {

// Matrix files come in two shapes:
//   .csv  header of column labels, then one row of probabilities per user
//   .json {"n": ..., "m": ..., "rows": [[...], ...]}
// Loaders renormalize rows whose sums drift by at most kLoadRenormTol and
// reject anything worse; parse failures raise IoError, constraint
// violations raise ValidationError.
RepresentationMatrix load_matrix(const std::string& path);
RepresentationMatrix load_matrix_csv(std::istream& in);
RepresentationMatrix load_matrix_json(std::istream& in);
void save_matrix(const RepresentationMatrix&, const std::string& path);
void save_matrix_csv(const RepresentationMatrix&, std::ostream& out);
void save_matrix_json(const RepresentationMatrix&, std::ostream& out);

// Prior files: {"components": [{"weight": w, "matrix": <matrix json>}]}.
// Component rows get the same renormalization treatment as plain matrices.
FinitePrior load_prior(const std::string& path);
FinitePrior load_prior_json(std::istream& in);
void save_prior(const FinitePrior&, const std::string& path);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

// Strict double parse: the whole token must be consumed.
double parse_double(const std::string& token);

}  // namespace reid

#pragma once

#include <cstddef>

#include "sinit/matrix.hpp"
#include "sinit/rng.hpp"

namespace sinit {

/// Householder QR of a rows×cols standard Gaussian matrix. Returns the first
/// min(rows, cols) columns of Q, with column signs flipped so that diag(R) > 0.
/// The result is Haar-distributed and unique for a given Gaussian draw.
Matrix qr_orthonormal(Rng& rng, std::size_t rows, std::size_t cols);

}  // namespace sinit

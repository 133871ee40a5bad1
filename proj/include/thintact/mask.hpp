#pragma once

#include <cstdint>
#include <vector>

#include "thintact/mat.hpp"

namespace thintact {

/// The +-1 vector phi that induces a separable binary mask.
struct MaskVector {
    std::vector<int> entries;  // each -1 or +1

    int length() const { return static_cast<int>(entries.size()); }
    void validate() const;  // throws InvalidInput on bad alphabet or length < 2
};

struct MaskPattern {
    Mat grid;                    // KxK, entries in {0, 1}, symmetric
    double feature_size_um = 0;  // mask feature size delta_mask
};

/// grid[i][j] = (1 + phi[i]*phi[j]) / 2.
MaskPattern assemble_mask(const MaskVector& phi, double feature_size_um = 20.0);

/// LFSR maximum-length sequence of length 2^order - 1, mapped {0 -> -1, 1 -> +1},
/// tiled `repeats` times. Taps from a fixed table of primitive polynomials
/// (orders 2-16), seed register = 1.
MaskVector mls_vector(int order, int repeats);

/// Deterministic i.i.d. uniform +-1 vector for GA population seeding.
MaskVector random_vector(int k, std::uint64_t seed);

}  // namespace thintact

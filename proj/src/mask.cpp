#include "thintact/mask.hpp"

#include <map>
#include <sstream>

#include "thintact/rng.hpp"

namespace thintact {

void MaskVector::validate() const {
    if (length() < 2) throw InvalidInput("MaskVector: length must be >= 2");
    for (int e : entries)
        if (e != -1 && e != 1)
            throw InvalidInput("MaskVector: entries must be -1 or +1, got " + std::to_string(e));
}

MaskPattern assemble_mask(const MaskVector& phi, double feature_size_um) {
    phi.validate();
    const int k = phi.length();
    MaskPattern mp{Mat(k, k), feature_size_um};
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            mp.grid(i, j) = (1 + phi.entries[i] * phi.entries[j]) / 2;
    return mp;
}

namespace {

// Fibonacci LFSR tap positions (1-based bit indices) for primitive polynomials.
const std::map<int, std::vector<int>>& tap_table() {
    static const std::map<int, std::vector<int>> taps = {
        {2, {2, 1}},          {3, {3, 2}},           {4, {4, 3}},
        {5, {5, 3}},          {6, {6, 5}},           {7, {7, 6}},
        {8, {8, 6, 5, 4}},    {9, {9, 5}},           {10, {10, 7}},
        {11, {11, 9}},        {12, {12, 6, 4, 1}},   {13, {13, 4, 3, 1}},
        {14, {14, 5, 3, 1}},  {15, {15, 14}},        {16, {16, 15, 13, 4}},
    };
    return taps;
}

}  // namespace

MaskVector mls_vector(int order, int repeats) {
    auto it = tap_table().find(order);
    if (it == tap_table().end()) {
        std::ostringstream msg;
        msg << "mls_vector: unsupported order " << order << "; supported orders:";
        for (const auto& [o, t] : tap_table()) msg << " " << o;
        throw InvalidInput(msg.str());
    }
    if (repeats < 1) throw InvalidInput("mls_vector: repeats must be >= 1");
    const std::vector<int>& taps = it->second;
    const int period = (1 << order) - 1;
    std::vector<int> seq(period);
    std::uint32_t reg = 1;  // all-zeros-except-last
    for (int i = 0; i < period; ++i) {
        int out = reg & 1;
        seq[i] = out ? 1 : -1;
        // Right-shifting Fibonacci register: tap t of x^t reads bit (order - t),
        // so the highest tap (t = order) is the output bit 0.
        std::uint32_t fb = 0;
        for (int t : taps) fb ^= (reg >> (order - t)) & 1;
        reg = (reg >> 1) | (fb << (order - 1));
    }
    MaskVector mv;
    mv.entries.reserve(static_cast<std::size_t>(period) * repeats);
    for (int r = 0; r < repeats; ++r) mv.entries.insert(mv.entries.end(), seq.begin(), seq.end());
    return mv;
}

MaskVector random_vector(int k, std::uint64_t seed) {
    if (k < 2) throw InvalidInput("random_vector: k must be >= 2");
    auto rng = rng_stream(seed, "mask.random_vector");
    std::uniform_int_distribution<int> bit(0, 1);
    MaskVector mv;
    mv.entries.resize(k);
    for (int i = 0; i < k; ++i) mv.entries[i] = bit(rng) ? 1 : -1;
    return mv;
}

}  // namespace thintact

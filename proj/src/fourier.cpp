#include "sorso/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <string>

#include "sorso/errors.hpp"

namespace sorso {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;
constexpr std::uint64_t kEnumerationCap = 1ULL << 24;

// (order+1)^dim with overflow saturation.
std::uint64_t full_count(int order, int dim) {
    std::uint64_t n = 1;
    for (int i = 0; i < dim; ++i) {
        std::uint64_t next = n * static_cast<std::uint64_t>(order + 1);
        if (next / static_cast<std::uint64_t>(order + 1) != n) return UINT64_MAX;
        n = next;
        if (n > kEnumerationCap) return n;
    }
    return n;
}

struct FrontierNode {
    std::uint64_t norm_sq;
    std::vector<int> c;
    int last_nonzero;  // -1 for the zero vector
};

struct NodeWorse {
    bool operator()(const FrontierNode& a, const FrontierNode& b) const {
        if (a.norm_sq != b.norm_sq) return a.norm_sq > b.norm_sq;
        return a.c > b.c;
    }
};

// Smallest max_features vectors of {0..order}^dim by (||c||_2, lex), without
// touching the full product space. Each vector is generated exactly once: its
// canonical parent decrements the last nonzero coordinate, so children only
// increment coordinates at or after it.
std::vector<int> truncated_enumeration(int order, int dim, int max_features) {
    std::priority_queue<FrontierNode, std::vector<FrontierNode>, NodeWorse> heap;
    heap.push({0, std::vector<int>(dim, 0), -1});
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(max_features) * dim);
    int taken = 0;
    while (taken < max_features && !heap.empty()) {
        FrontierNode node = heap.top();
        heap.pop();
        out.insert(out.end(), node.c.begin(), node.c.end());
        ++taken;
        int from = node.last_nonzero < 0 ? 0 : node.last_nonzero;
        for (int j = from; j < dim; ++j) {
            if (node.c[j] == order) continue;
            FrontierNode child = node;
            child.c[j] += 1;
            child.norm_sq += static_cast<std::uint64_t>(2 * node.c[j] + 1);
            child.last_nonzero = j;
            heap.push(std::move(child));
        }
    }
    return out;
}

std::vector<int> lexicographic_enumeration(int order, int dim, std::uint64_t count) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count) * dim);
    std::vector<int> c(dim, 0);
    for (;;) {
        out.insert(out.end(), c.begin(), c.end());
        int j = dim - 1;
        while (j >= 0 && c[j] == order) {
            c[j] = 0;
            --j;
        }
        if (j < 0) break;
        c[j] += 1;
    }
    return out;
}

}  // namespace

FourierBasis::FourierBasis(int order, int dim, int max_features) : order_(order), dim_(dim) {
    if (order < 0 || dim < 1) throw ConfigError("fourier basis: order must be >= 0, dim >= 1");
    if (max_features < 0) throw ConfigError("fourier basis: max_features must be >= 0");
    std::uint64_t total = full_count(order, dim);
    if (max_features > 0) {
        std::uint64_t want = std::min<std::uint64_t>(total, static_cast<std::uint64_t>(max_features));
        coeffs_ = truncated_enumeration(order, dim, static_cast<int>(want));
        count_ = static_cast<int>(want);
    } else {
        if (total > kEnumerationCap)
            throw ConfigError("fourier basis: (order+1)^dim = " +
                              (total == UINT64_MAX ? std::string("overflow")
                                                   : std::to_string(total)) +
                              " exceeds the enumeration cap; set max_features");
        coeffs_ = lexicographic_enumeration(order, dim, total);
        count_ = static_cast<int>(total);
    }
}

void FourierBasis::featurize(std::span<const double> state, std::vector<double>& out) const {
    if (static_cast<int>(state.size()) != dim_)
        throw UsageError("featurize: state has dim " + std::to_string(state.size()) +
                         ", basis expects " + std::to_string(dim_));
    for (int j = 0; j < dim_; ++j) {
        if (!(state[j] >= 0.0 && state[j] <= 1.0))
            throw UsageError("featurize: state component " + std::to_string(j) + " = " +
                             std::to_string(state[j]) + " outside [0,1]");
    }
    out.resize(count_);
    const int* c = coeffs_.data();
    for (int i = 0; i < count_; ++i, c += dim_) {
        double dot = 0.0;
        for (int j = 0; j < dim_; ++j) dot += c[j] * state[j];
        out[i] = std::cos(kPi * dot);
    }
}

std::vector<double> FourierBasis::lr_scaling(double alpha) const {
    std::vector<double> out(count_);
    const int* c = coeffs_.data();
    for (int i = 0; i < count_; ++i, c += dim_) {
        double nsq = 0.0;
        for (int j = 0; j < dim_; ++j) nsq += static_cast<double>(c[j]) * c[j];
        out[i] = alpha / std::max(std::sqrt(nsq), 1.0);
    }
    return out;
}

}  // namespace sorso

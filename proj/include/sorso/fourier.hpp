#pragma once

#include <span>
#include <vector>

namespace sorso {

// Maps a state vector to a feature vector. Implemented by FourierBasis for
// the games and by trivial featurizers in tests.
class Featurizer {
public:
    virtual ~Featurizer() = default;
    virtual int input_dim() const = 0;
    virtual int feature_count() const = 0;
    virtual void featurize(std::span<const double> state, std::vector<double>& out) const = 0;

    // Per-feature learning rates; empty means a uniform alpha.
    virtual std::vector<double> lr_scaling(double) const { return {}; }

    std::vector<double> featurize(std::span<const double> state) const {
        std::vector<double> out;
        featurize(state, out);
        return out;
    }
};

// Fourier cosine basis over [0,1]^dim: phi_i(s) = cos(pi * c_i . s) with
// integer coefficient vectors c_i in {0..order}^dim.
//
// max_features == 0 enumerates all (order+1)^dim vectors in lexicographic
// order (guarded against blowup). max_features > 0 keeps the max_features
// smallest vectors by (||c||_2, lex), emitted in that order.
class FourierBasis : public Featurizer {
public:
    FourierBasis(int order, int dim, int max_features = 0);

    int order() const { return order_; }
    int input_dim() const override { return dim_; }
    int feature_count() const override { return count_; }

    std::span<const int> coefficient(int i) const {
        return {coeffs_.data() + static_cast<std::size_t>(i) * dim_,
                static_cast<std::size_t>(dim_)};
    }

    void featurize(std::span<const double> state, std::vector<double>& out) const override;
    using Featurizer::featurize;

    // Per-feature learning rates alpha / max(||c_i||_2, 1).
    std::vector<double> lr_scaling(double alpha) const override;

private:
    int order_;
    int dim_;
    int count_;
    std::vector<int> coeffs_;  // count_ * dim_, row-major
};

}  // namespace sorso

#include "mzsg/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mzsg/parallel.hpp"

namespace mzsg {

namespace {

std::vector<std::vector<int>> total_degree_indices(int dims, int degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> alpha(dims, 0);
    // lexicographic enumeration of multi-indices with |alpha| <= degree
    for (;;) {
        if (std::accumulate(alpha.begin(), alpha.end(), 0) <= degree) out.push_back(alpha);
        int k = dims - 1;
        while (k >= 0) {
            if (++alpha[k] > degree) {
                alpha[k] = 0;
                --k;
            } else {
                break;
            }
        }
        if (k < 0) break;
    }
    return out;
}

class PolyFn : public FittedFn {
public:
    std::vector<int> kept;           // retained coordinate indices
    std::vector<double> mean, scale; // per retained coordinate
    std::vector<std::vector<int>> alphas;
    std::vector<double> coef;

    double eval(const double* x) const override {
        double acc = 0.0;
        for (std::size_t f = 0; f < alphas.size(); ++f) {
            double term = coef[f];
            for (std::size_t k = 0; k < kept.size(); ++k) {
                const int a = alphas[f][k];
                if (a == 0) continue;
                const double s = (x[kept[k]] - mean[k]) / scale[k];
                for (int r = 0; r < a; ++r) term *= s;
            }
            acc += term;
        }
        return acc;
    }
};

class BinsFn : public FittedFn {
public:
    std::vector<std::vector<double>> edges; // per dimension, interior edges
    std::vector<int> strides;
    std::vector<double> values; // per cell; empty cells carry the global mean

    int cell_of(const double* x) const {
        int cell = 0;
        for (std::size_t k = 0; k < edges.size(); ++k) {
            const auto& e = edges[k];
            const int digit = static_cast<int>(
                std::upper_bound(e.begin(), e.end(), x[k]) - e.begin());
            cell += digit * strides[k];
        }
        return cell;
    }

    double eval(const double* x) const override { return values[cell_of(x)]; }
};

} // namespace

struct StepRegression::Impl {
    RegressionBasis spec;
    const PathBundle* bundle = nullptr;
    int step = 0;
    std::string label;
    int M = 0;
    int d = 0;

    // Polynomial state
    std::vector<int> kept;
    std::vector<double> mean, scale;
    std::vector<std::vector<int>> alphas;
    std::vector<double> features; // M x F, row-major
    LuFactors gram_lu;
    bool gram_ready = false;

    // Bins state
    std::vector<std::vector<double>> edges;
    std::vector<int> strides;
    std::vector<int> cell_index; // per path
    int cells = 0;

    const double* state(int m) const { return bundle->state_ptr(m, step); }

    void build_polynomial() {
        mean.clear();
        scale.clear();
        kept.clear();
        for (int k = 0; k < d; ++k) {
            const double mu =
                chunked_sum(M, [&](std::size_t m) { return state(static_cast<int>(m))[k]; }) / M;
            const double var = chunked_sum(M, [&](std::size_t m) {
                                   const double v = state(static_cast<int>(m))[k] - mu;
                                   return v * v;
                               }) /
                               M;
            const double sd = std::sqrt(std::max(var, 0.0));
            if (sd > 1e-10 * (1.0 + std::fabs(mu))) {
                kept.push_back(k);
                mean.push_back(mu);
                scale.push_back(sd);
            }
        }
        alphas = total_degree_indices(static_cast<int>(kept.size()), spec.degree);
        const std::size_t F = alphas.size();

        features.resize(static_cast<std::size_t>(M) * F);
        parallel_for(static_cast<std::size_t>(M), [&](std::size_t m) {
            const double* x = state(static_cast<int>(m));
            double* row = &features[m * F];
            for (std::size_t f = 0; f < F; ++f) {
                double term = 1.0;
                for (std::size_t k = 0; k < kept.size(); ++k) {
                    const int a = alphas[f][k];
                    if (a == 0) continue;
                    const double s = (x[kept[k]] - mean[k]) / scale[k];
                    for (int r = 0; r < a; ++r) term *= s;
                }
                row[f] = term;
            }
        });

        // Gram matrix by deterministic chunked accumulation.
        const std::size_t chunks = (static_cast<std::size_t>(M) + kReductionChunk - 1) /
                                   kReductionChunk;
        std::vector<double> partial(chunks * F * F, 0.0);
        parallel_chunks(static_cast<std::size_t>(M), [&](std::size_t b, std::size_t e) {
            double* g = &partial[(b / kReductionChunk) * F * F];
            for (std::size_t m = b; m < e; ++m) {
                const double* row = &features[m * F];
                for (std::size_t i = 0; i < F; ++i)
                    for (std::size_t j = i; j < F; ++j) g[i * F + j] += row[i] * row[j];
            }
        });
        Matrix gram(static_cast<int>(F));
        for (std::size_t c = 0; c < chunks; ++c)
            for (std::size_t i = 0; i < F; ++i)
                for (std::size_t j = i; j < F; ++j)
                    gram(static_cast<int>(i), static_cast<int>(j)) +=
                        partial[c * F * F + i * F + j];
        for (std::size_t i = 0; i < F; ++i)
            for (std::size_t j = 0; j < i; ++j)
                gram(static_cast<int>(i), static_cast<int>(j)) =
                    gram(static_cast<int>(j), static_cast<int>(i));

        try {
            gram_lu = lu_factor(gram);
        } catch (const NumericsError&) {
            throw RegressionError("regression features are collinear at " + label);
        }
        double dmin = std::fabs(gram_lu.lu(0, 0)), dmax = dmin;
        for (std::size_t i = 1; i < F; ++i) {
            const double v = std::fabs(gram_lu.lu(static_cast<int>(i), static_cast<int>(i)));
            dmin = std::min(dmin, v);
            dmax = std::max(dmax, v);
        }
        if (!(dmin > 1e-13 * dmax))
            throw RegressionError("regression features are (nearly) collinear at " + label);
        gram_ready = true;
    }

    void build_bins() {
        const int B = std::max(1, spec.bin_count);
        const int per_dim = std::max(
            1, static_cast<int>(std::floor(std::pow(static_cast<double>(B), 1.0 / d))));
        edges.assign(d, {});
        strides.assign(d, 0);
        cells = 1;
        std::vector<double> column(M);
        for (int k = 0; k < d; ++k) {
            for (int m = 0; m < M; ++m) column[m] = state(m)[k];
            std::sort(column.begin(), column.end());
            const double spread = column.back() - column.front();
            int splits = per_dim;
            if (!(spread > 1e-12 * (1.0 + std::fabs(column.front())))) splits = 1;
            auto& e = edges[k];
            for (int b = 1; b < splits; ++b)
                e.push_back(column[static_cast<std::size_t>(b) * M / splits]);
            strides[k] = cells;
            cells *= splits;
        }
        cell_index.resize(M);
        BinsFn locator;
        locator.edges = edges;
        locator.strides = strides;
        parallel_for(static_cast<std::size_t>(M), [&](std::size_t m) {
            cell_index[m] = locator.cell_of(state(static_cast<int>(m)));
        });
    }
};

StepRegression::StepRegression(const RegressionBasis& spec, const PathBundle& bundle, int step,
                               std::string label)
    : impl_(std::make_unique<Impl>()) {
    impl_->spec = spec;
    impl_->bundle = &bundle;
    impl_->step = step;
    impl_->label = std::move(label);
    impl_->M = bundle.path_count;
    impl_->d = bundle.dim;
    if (spec.family == RegressionBasis::Family::Polynomial)
        impl_->build_polynomial();
    else
        impl_->build_bins();
}

StepRegression::~StepRegression() = default;
StepRegression::StepRegression(StepRegression&&) noexcept = default;

std::shared_ptr<FittedFn> StepRegression::fit(const std::vector<double>& responses,
                                              std::vector<double>* fitted) const {
    const Impl& im = *impl_;
    const auto M = static_cast<std::size_t>(im.M);
    if (responses.size() != M)
        throw RegressionError("fit: response length mismatch at " + im.label);

    if (im.spec.family == RegressionBasis::Family::Polynomial) {
        const std::size_t F = im.alphas.size();
        const std::size_t chunks = (M + kReductionChunk - 1) / kReductionChunk;
        std::vector<double> partial(chunks * F, 0.0);
        parallel_chunks(M, [&](std::size_t b, std::size_t e) {
            double* r = &partial[(b / kReductionChunk) * F];
            for (std::size_t m = b; m < e; ++m) {
                const double* row = &im.features[m * F];
                const double y = responses[m];
                for (std::size_t f = 0; f < F; ++f) r[f] += row[f] * y;
            }
        });
        Vec rhs(F, 0.0);
        for (std::size_t c = 0; c < chunks; ++c)
            for (std::size_t f = 0; f < F; ++f) rhs[f] += partial[c * F + f];

        auto fn = std::make_shared<PolyFn>();
        fn->kept = im.kept;
        fn->mean = im.mean;
        fn->scale = im.scale;
        fn->alphas = im.alphas;
        fn->coef = lu_solve(im.gram_lu, rhs);

        if (fitted) {
            fitted->resize(M);
            parallel_for(M, [&](std::size_t m) {
                const double* row = &im.features[m * F];
                double s = 0.0;
                for (std::size_t f = 0; f < F; ++f) s += row[f] * fn->coef[f];
                (*fitted)[m] = s;
            });
        }
        return fn;
    }

    // Local bins: cell means with deterministic chunked accumulation.
    const auto cells = static_cast<std::size_t>(im.cells);
    const std::size_t chunks = (M + kReductionChunk - 1) / kReductionChunk;
    std::vector<double> sum_partial(chunks * cells, 0.0);
    std::vector<double> cnt_partial(chunks * cells, 0.0);
    parallel_chunks(M, [&](std::size_t b, std::size_t e) {
        double* s = &sum_partial[(b / kReductionChunk) * cells];
        double* c = &cnt_partial[(b / kReductionChunk) * cells];
        for (std::size_t m = b; m < e; ++m) {
            s[im.cell_index[m]] += responses[m];
            c[im.cell_index[m]] += 1.0;
        }
    });
    std::vector<double> sums(cells, 0.0), counts(cells, 0.0);
    for (std::size_t c = 0; c < chunks; ++c)
        for (std::size_t j = 0; j < cells; ++j) {
            sums[j] += sum_partial[c * cells + j];
            counts[j] += cnt_partial[c * cells + j];
        }
    double total = 0.0, n = 0.0;
    for (std::size_t j = 0; j < cells; ++j) {
        total += sums[j];
        n += counts[j];
    }
    const double global_mean = n > 0.0 ? total / n : 0.0;

    auto fn = std::make_shared<BinsFn>();
    fn->edges = im.edges;
    fn->strides = im.strides;
    fn->values.resize(cells);
    for (std::size_t j = 0; j < cells; ++j)
        fn->values[j] = counts[j] > 0.0 ? sums[j] / counts[j] : global_mean;

    if (fitted) {
        fitted->resize(M);
        parallel_for(M, [&](std::size_t m) { (*fitted)[m] = fn->values[im.cell_index[m]]; });
    }
    return fn;
}

} // namespace mzsg

#include "jtrack/learners.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jtrack/fft.hpp"

namespace jtrack {

namespace {

using Cplx = std::complex<double>;

double wrapped_delta(double d, int period) {
    // smallest-magnitude representative of d modulo period
    d = std::fmod(d, static_cast<double>(period));
    if (d < -0.5 * period) d += period;
    if (d >= 0.5 * period) d -= period;
    return d;
}

void check_labeled(const std::vector<TrainingSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("train_filter: no samples");
    const auto& f0 = samples.front().features;
    for (const auto& s : samples) {
        if (!s.label) throw std::invalid_argument("train_filter: sample lacks a label map");
        if (s.features.rows != f0.rows || s.features.cols != f0.cols ||
            s.features.channels != f0.channels)
            throw std::invalid_argument("train_filter: sample dimensions disagree");
        if (s.label->rows != f0.rows || s.label->cols != f0.cols)
            throw std::invalid_argument("train_filter: label dimensions disagree");
    }
}

// Accumulated per-frequency normal equations and their solution.
// System at each bin u: (sum_k w_k conj(x_k) x_k^T + lambda I) fhat = sum_k w_k conj(x_k) yhat_k.
CorrelationFilter solve_normal_equations(const std::vector<const SampleSpectrum*>& spectra,
                                         const std::vector<double>& weights, double lambda) {
    const SampleSpectrum& s0 = *spectra.front();
    const int d = s0.channels;
    const int bins = static_cast<int>(s0.label.size());

    std::vector<Cplx> lhs(static_cast<size_t>(bins) * d * d, Cplx(0.0, 0.0));
    std::vector<Cplx> rhs(static_cast<size_t>(bins) * d, Cplx(0.0, 0.0));

    for (size_t k = 0; k < spectra.size(); ++k) {
        const double w = weights[k];
        if (w == 0.0) continue;
        const SampleSpectrum& s = *spectra[k];
        for (int u = 0; u < bins; ++u) {
            const Cplx* x = &s.features[static_cast<size_t>(u) * d];
            Cplx* a = &lhs[static_cast<size_t>(u) * d * d];
            Cplx* b = &rhs[static_cast<size_t>(u) * d];
            const Cplx y = s.label[u];
            for (int i = 0; i < d; ++i) {
                const Cplx wxc = w * std::conj(x[i]);
                for (int j = 0; j < d; ++j) a[i * d + j] += wxc * x[j];
                b[i] += wxc * y;
            }
        }
    }

    CorrelationFilter filter;
    filter.rows = s0.rows;
    filter.cols = s0.cols;
    filter.channels = d;
    filter.regularization_weight = lambda;
    filter.coeffs.resize(static_cast<size_t>(s0.rows) * s0.cols * d);

    Eigen::MatrixXcd A(d, d);
    Eigen::VectorXcd b(d);
    std::vector<Cplx> fhat(static_cast<size_t>(bins) * d);
    Eigen::LDLT<Eigen::MatrixXcd> ldlt(d);
    for (int u = 0; u < bins; ++u) {
        const Cplx* a = &lhs[static_cast<size_t>(u) * d * d];
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) A(i, j) = a[i * d + j];
            A(i, i) += lambda;
            b(i) = rhs[static_cast<size_t>(u) * d + i];
        }
        if (lambda == 0.0) {
            // Rank-deficient data makes the system singular at this bin.
            const double dmax = A.diagonal().real().maxCoeff();
            Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
            lu.setThreshold(1e-12);
            if (dmax <= 0.0 || lu.rank() < d)
                throw std::domain_error("train_filter: degenerate system (lambda = 0 and "
                                        "rank-deficient data at some frequency)");
            Eigen::VectorXcd f = lu.solve(b);
            for (int i = 0; i < d; ++i) fhat[static_cast<size_t>(u) * d + i] = f(i);
        } else {
            ldlt.compute(A);
            Eigen::VectorXcd f = ldlt.solve(b);
            for (int i = 0; i < d; ++i) fhat[static_cast<size_t>(u) * d + i] = f(i);
        }
    }

    // Back to the spatial domain, channel by channel.
    auto& fft = fft::fft_for(s0.rows, s0.cols);
    std::vector<Cplx> chan(bins);
    for (int l = 0; l < d; ++l) {
        for (int u = 0; u < bins; ++u) chan[u] = fhat[static_cast<size_t>(u) * d + l];
        fft.inverse(chan.data(), filter.channel(l));
    }
    return filter;
}

// Forward spectra of the filter, channel-major ([l*bins + u]).
std::vector<Cplx> filter_spectrum(const CorrelationFilter& model) {
    auto& fft = fft::fft_for(model.rows, model.cols);
    const int bins = fft.bins();
    std::vector<Cplx> fhat(static_cast<size_t>(model.channels) * bins);
    for (int l = 0; l < model.channels; ++l)
        fft.forward(model.channel(l), fhat.data() + static_cast<size_t>(l) * bins);
    return fhat;
}

double loss_from_spectra(const SampleSpectrum& s, const std::vector<Cplx>& fhat_chmajor) {
    const int d = s.channels;
    const int bins = static_cast<int>(s.label.size());
    const int half = s.cols / 2 + 1;
    double acc = 0.0;
    for (int u = 0; u < bins; ++u) {
        Cplx resp(0.0, 0.0);
        const Cplx* x = &s.features[static_cast<size_t>(u) * d];
        for (int l = 0; l < d; ++l) resp += x[l] * fhat_chmajor[static_cast<size_t>(l) * bins + u];
        const Cplx err = s.label[u] - resp;
        acc += fft::bin_weight(u % half, s.cols) * std::norm(err);
    }
    return acc / (static_cast<double>(s.rows) * s.cols);
}

}  // namespace

double CorrelationFilter::squared_norm() const {
    double acc = 0.0;
    for (double c : coeffs) acc += c * c;
    return acc;
}

LabelMap make_gaussian_label(int rows, int cols, double center_row, double center_col,
                             double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("make_gaussian_label: sigma must be > 0");
    if (center_row < 0 || center_row >= rows || center_col < 0 || center_col >= cols)
        throw std::invalid_argument("make_gaussian_label: center outside the grid");
    LabelMap y(rows, cols);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int r = 0; r < rows; ++r) {
        const double dr = wrapped_delta(r - center_row, rows);
        for (int c = 0; c < cols; ++c) {
            const double dc = wrapped_delta(c - center_col, cols);
            y.at(r, c) = std::exp(-(dr * dr + dc * dc) * inv);
        }
    }
    return y;
}

SampleSpectrum compute_sample_spectrum(const TrainingSample& sample) {
    if (!sample.label) throw std::invalid_argument("compute_sample_spectrum: unlabeled sample");
    const FeatureMap& f = sample.features;
    auto& fft = fft::fft_for(f.rows, f.cols);
    const int bins = fft.bins();

    SampleSpectrum s;
    s.rows = f.rows;
    s.cols = f.cols;
    s.channels = f.channels;
    s.label.resize(bins);
    fft.forward(sample.label->v.data(), s.label.data());

    // Transpose channel spectra into bin-major order for the accumulation loop.
    s.features.resize(static_cast<size_t>(bins) * f.channels);
    std::vector<Cplx> chan(bins);
    for (int l = 0; l < f.channels; ++l) {
        fft.forward(f.channel(l), chan.data());
        for (int u = 0; u < bins; ++u) s.features[static_cast<size_t>(u) * f.channels + l] = chan[u];
    }
    return s;
}

CorrelationFilter train_filter(const std::vector<TrainingSample>& samples,
                               const std::vector<double>& alpha, double lambda) {
    check_labeled(samples);
    if (samples.size() != alpha.size())
        throw std::invalid_argument("train_filter: |samples| != |alpha|");
    if (lambda < 0.0) throw std::invalid_argument("train_filter: lambda must be >= 0");

    std::vector<SampleSpectrum> spectra;
    spectra.reserve(samples.size());
    for (const auto& s : samples) spectra.push_back(compute_sample_spectrum(s));
    std::vector<const SampleSpectrum*> ptrs;
    ptrs.reserve(spectra.size());
    for (const auto& s : spectra) ptrs.push_back(&s);
    return solve_normal_equations(ptrs, alpha, lambda);
}

Grid filter_confidence(const CorrelationFilter& model, const FeatureMap& features) {
    if (features.rows != model.rows || features.cols != model.cols ||
        features.channels != model.channels)
        throw std::invalid_argument("filter_confidence: dimension mismatch");
    auto& fft = fft::fft_for(model.rows, model.cols);
    const int bins = fft.bins();

    std::vector<Cplx> acc(bins, Cplx(0.0, 0.0));
    std::vector<Cplx> fhat(bins), xhat(bins);
    for (int l = 0; l < model.channels; ++l) {
        fft.forward(model.channel(l), fhat.data());
        fft.forward(features.channel(l), xhat.data());
        for (int u = 0; u < bins; ++u) acc[u] += fhat[u] * xhat[u];
    }
    return fft.inverse_grid(acc.data());
}

double filter_frame_loss(const CorrelationFilter& model, const TrainingSample& sample) {
    if (sample.features.rows != model.rows || sample.features.cols != model.cols ||
        sample.features.channels != model.channels)
        throw std::invalid_argument("filter_frame_loss: dimension mismatch");
    SampleSpectrum s = compute_sample_spectrum(sample);
    return loss_from_spectra(s, filter_spectrum(model));
}

CorrelationFilter train_filter_spatial(const std::vector<TrainingSample>& samples,
                                       const std::vector<double>& alpha, const Grid& penalty,
                                       int sweeps, const CorrelationFilter* warm_start) {
    check_labeled(samples);
    if (samples.size() != alpha.size())
        throw std::invalid_argument("train_filter_spatial: |samples| != |alpha|");
    const FeatureMap& f0 = samples.front().features;
    if (penalty.rows != f0.rows || penalty.cols != f0.cols)
        throw std::invalid_argument("train_filter_spatial: penalty dimensions disagree");
    for (double w : penalty.v)
        if (!(w > 0.0))
            throw std::invalid_argument("train_filter_spatial: penalty must be strictly positive");
    const int hw = f0.rows * f0.cols;
    const int n = hw * f0.channels;
    if (n > 4096) throw std::invalid_argument("train_filter_spatial: problem exceeds 4096 unknowns");

    // Dense circular-convolution operator X = [C(x^1) ... C(x^d)]:
    // (f (*) x)[p] = sum_q f[q] x[p - q mod].
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd conv(hw, n);
    for (size_t k = 0; k < samples.size(); ++k) {
        if (alpha[k] == 0.0) continue;
        const FeatureMap& x = samples[k].features;
        for (int l = 0; l < x.channels; ++l) {
            const double* xc = x.channel(l);
            for (int pr = 0; pr < x.rows; ++pr)
                for (int pc = 0; pc < x.cols; ++pc) {
                    const int p = pr * x.cols + pc;
                    for (int qr = 0; qr < x.rows; ++qr)
                        for (int qc = 0; qc < x.cols; ++qc) {
                            const int q = qr * x.cols + qc;
                            const int sr = (pr - qr + x.rows) % x.rows;
                            const int sc = (pc - qc + x.cols) % x.cols;
                            conv(p, l * hw + q) = xc[sr * x.cols + sc];
                        }
                }
        }
        Eigen::Map<const Eigen::VectorXd> y(samples[k].label->v.data(), hw);
        lhs.noalias() += alpha[k] * (conv.transpose() * conv);
        rhs.noalias() += alpha[k] * (conv.transpose() * y);
    }
    for (int l = 0; l < f0.channels; ++l)
        for (int p = 0; p < hw; ++p) {
            const double w = penalty.v[p];
            lhs(l * hw + p, l * hw + p) += w * w;
        }

    CorrelationFilter filter;
    filter.rows = f0.rows;
    filter.cols = f0.cols;
    filter.channels = f0.channels;
    filter.spatial_penalty = penalty;
    filter.coeffs.assign(static_cast<size_t>(n), 0.0);
    if (warm_start) {
        if (warm_start->rows != f0.rows || warm_start->cols != f0.cols ||
            warm_start->channels != f0.channels)
            throw std::invalid_argument("train_filter_spatial: warm start dimensions disagree");
        filter.coeffs = warm_start->coeffs;
    }

    std::vector<double>& x = filter.coeffs;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int i = 0; i < n; ++i) {
            double acc = rhs(i);
            for (int j = 0; j < n; ++j) acc -= lhs(i, j) * x[j];
            x[i] += acc / lhs(i, i);
        }
    }
    return filter;
}

const SampleSpectrum& RidgeFilterLearner::spectrum_for(const FrameSamples& frame) {
    auto it = cache_.find(frame.frame_index);
    if (it == cache_.end()) {
        if (frame.samples.size() != 1)
            throw std::invalid_argument("RidgeFilterLearner: expects one sample per frame");
        it = cache_.emplace(frame.frame_index, compute_sample_spectrum(frame.samples.front()))
                 .first;
    }
    return it->second;
}

void RidgeFilterLearner::prune(const std::vector<FrameSamples>& frames) {
    if (cache_.size() <= 2 * frames.size() + 8) return;
    std::unordered_map<long, SampleSpectrum> kept;
    for (const auto& fr : frames) {
        auto it = cache_.find(fr.frame_index);
        if (it != cache_.end()) kept.insert(std::move(*it));
    }
    cache_ = std::move(kept);
}

CorrelationFilter RidgeFilterLearner::train(const std::vector<FrameSamples>& frames,
                                            const std::vector<double>& alpha) {
    if (frames.empty()) throw std::invalid_argument("RidgeFilterLearner: no frames");
    if (frames.size() != alpha.size())
        throw std::invalid_argument("RidgeFilterLearner: |frames| != |alpha|");
    prune(frames);
    std::vector<const SampleSpectrum*> spectra;
    spectra.reserve(frames.size());
    for (const auto& fr : frames) spectra.push_back(&spectrum_for(fr));
    return solve_normal_equations(spectra, alpha, lambda_);
}

std::vector<double> RidgeFilterLearner::frame_losses(const Model& model,
                                                     const std::vector<FrameSamples>& frames) {
    const std::vector<Cplx> fhat = filter_spectrum(model);
    std::vector<double> losses(frames.size());
    for (size_t k = 0; k < frames.size(); ++k)
        losses[k] = loss_from_spectra(spectrum_for(frames[k]), fhat);
    return losses;
}

double RidgeFilterLearner::frame_loss(const Model& model, const FrameSamples& frame) {
    return loss_from_spectra(spectrum_for(frame), filter_spectrum(model));
}

}  // namespace jtrack

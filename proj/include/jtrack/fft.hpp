#ifndef JTRACK_FFT_HPP
#define JTRACK_FFT_HPP

#include <complex>
#include <vector>

#include "jtrack/grid.hpp"

namespace jtrack::fft {

// 2-D real-to-complex FFT pair for a fixed grid size. Stores the half
// spectrum (rows x (cols/2 + 1) bins, row-major). Plans and scratch buffers
// are per-instance; use fft_for() to reuse plans within a thread.
class Fft2d {
  public:
    Fft2d(int rows, int cols);
    ~Fft2d();
    Fft2d(const Fft2d&) = delete;
    Fft2d& operator=(const Fft2d&) = delete;

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int bins() const { return rows_ * (cols_ / 2 + 1); }

    // Unnormalized forward transform of a row-major rows x cols array.
    void forward(const double* spatial, std::complex<double>* spectrum);
    // Inverse transform scaled by 1/(rows*cols), so inverse(forward(x)) == x.
    void inverse(const std::complex<double>* spectrum, double* spatial);

    std::vector<std::complex<double>> forward(const Grid& g);
    Grid inverse_grid(const std::complex<double>* spectrum);

  private:
    int rows_, cols_;
    void* plan_fwd_;
    void* plan_inv_;
    double* real_buf_;
    void* cplx_buf_;
};

// Thread-local plan cache keyed by size.
Fft2d& fft_for(int rows, int cols);

// Multiplicity of a half-spectrum bin when summing over the full spectrum:
// 2 for bins with a distinct conjugate partner, 1 for self-conjugate columns.
inline double bin_weight(int col, int full_cols) {
    if (col == 0) return 1.0;
    if (full_cols % 2 == 0 && col == full_cols / 2) return 1.0;
    return 2.0;
}

// sum_{spatial} a^2 of the signal with half spectrum `spec`, via Parseval:
// (1/(rows*cols)) * sum_bins weight * |spec|^2.
double spectrum_energy(const std::complex<double>* spec, int rows, int cols);

}  // namespace jtrack::fft

#endif

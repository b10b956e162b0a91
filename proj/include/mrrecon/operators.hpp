#pragma once

#include <cmath>

#include "mrrecon/calibration.hpp"
#include "mrrecon/fourier.hpp"

namespace mrr {

/// Per-coil complex sensitivity maps on the image grid.
struct SensitivitySet {
  std::vector<ComplexArray> maps;  // one U x V map per coil

  std::size_t coils() const { return maps.size(); }
  std::size_t rows() const { return maps[0].dims[0]; }
  std::size_t cols() const { return maps[0].dims[1]; }
};

inline double weighted_norm_sq(const ComplexArray& x,
                               const std::vector<double>& gamma) {
  if (x.data.size() != gamma.size())
    throw std::invalid_argument("weighted_norm_sq: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.data.size(); ++i)
    s += gamma[i] * std::norm(x.data[i]);
  return s;
}

/// Multi-coil encoding E = M F S: image -> masked per-coil k-space, stacked
/// as a (C, U, V) array.  The mask arrives in the centered layout and is
/// unshifted once here to align with unshifted DFT output.
class EncodingOperator {
 public:
  EncodingOperator(SensitivitySet maps, const SamplingMask& mask)
      : maps_(std::move(maps)), rows_(mask.rows), cols_(mask.cols) {
    if (maps_.rows() != rows_ || maps_.cols() != cols_)
      throw std::invalid_argument("EncodingOperator: map / mask dims mismatch");
    ComplexArray m({rows_, cols_});
    for (std::size_t i = 0; i < m.data.size(); ++i)
      m.data[i] = cplx{mask.collected[i] ? 1.0 : 0.0, 0.0};
    mask_unshifted_ = ifftshift2(m);
  }

  std::size_t coils() const { return maps_.coils(); }
  std::vector<std::size_t> image_dims() const { return {rows_, cols_}; }
  std::vector<std::size_t> data_dims() const {
    return {maps_.coils(), rows_, cols_};
  }
  const SensitivitySet& maps() const { return maps_; }

  ComplexArray forward(const ComplexArray& m) const {
    if (m.dims[0] != rows_ || m.dims[1] != cols_)
      throw std::invalid_argument("encode: image dims mismatch");
    ComplexArray out(data_dims());
    ComplexArray tmp({rows_, cols_});
    for (std::size_t c = 0; c < coils(); ++c) {
      for (std::size_t i = 0; i < tmp.data.size(); ++i)
        tmp.data[i] = maps_.maps[c].data[i] * m.data[i];
      const ComplexArray k = dft2(tmp);
      cplx* dst = out.data.data() + c * rows_ * cols_;
      for (std::size_t i = 0; i < k.data.size(); ++i)
        dst[i] = mask_unshifted_.data[i].real() != 0.0 ? k.data[i]
                                                       : cplx{0.0, 0.0};
    }
    return out;
  }

  ComplexArray adjoint(const ComplexArray& y) const {
    if (y.size() != coils() * rows_ * cols_)
      throw std::invalid_argument("encode_adjoint: data dims mismatch");
    ComplexArray out({rows_, cols_});
    const double uv = static_cast<double>(rows_) * cols_;
    ComplexArray tmp({rows_, cols_});
    for (std::size_t c = 0; c < coils(); ++c) {
      const cplx* src = y.data.data() + c * rows_ * cols_;
      for (std::size_t i = 0; i < tmp.data.size(); ++i)
        tmp.data[i] =
            mask_unshifted_.data[i].real() != 0.0 ? src[i] : cplx{0.0, 0.0};
      const ComplexArray img = idft2(tmp);
      for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] += std::conj(maps_.maps[c].data[i]) * uv * img.data[i];
    }
    return out;
  }

 private:
  SensitivitySet maps_;
  std::size_t rows_, cols_;
  ComplexArray mask_unshifted_;
};

/// Stacked SPIRiT residual operator R: image -> per-target-coil k-space
/// residuals (W^(t) - I) F S m.  Circular convolution by the calibrated taps
/// is folded into one image-domain map per target coil:
///   R_t m = F( P_t .* m ),   P_t = sum_c (transfer_{t,c} - delta_{t,c}) S_c,
/// where transfer_{t,c}(u, v) = sum_d tap[d] exp(+i 2 pi (d_r u / U + d_c v / V)).
class SpiritOperator {
 public:
  SpiritOperator(const SpiritKernelSet& kset, const SensitivitySet& maps)
      : coils_(kset.coils), rows_(maps.rows()), cols_(maps.cols()) {
    if (maps.coils() != kset.coils)
      throw std::invalid_argument("SpiritOperator: coil count mismatch");
    const double two_pi = 2.0 * 3.14159265358979323846;
    combined_.assign(coils_, ComplexArray({rows_, cols_}));
    for (std::size_t t = 0; t < coils_; ++t) {
      for (std::size_t c = 0; c < coils_; ++c) {
        ComplexArray transfer({rows_, cols_});
        for (int dr = -kset.radius; dr <= kset.radius; ++dr)
          for (int dc = -kset.radius; dc <= kset.radius; ++dc) {
            const cplx w = kset.tap(t, c, dr, dc);
            if (w == cplx{0.0, 0.0}) continue;
            for (std::size_t u = 0; u < rows_; ++u) {
              const double pr = two_pi * dr * double(u) / rows_;
              for (std::size_t v = 0; v < cols_; ++v) {
                const double ph = pr + two_pi * dc * double(v) / cols_;
                transfer.at(u, v) += w * cplx{std::cos(ph), std::sin(ph)};
              }
            }
          }
        if (t == c)
          for (cplx& z : transfer.data) z -= 1.0;
        for (std::size_t i = 0; i < transfer.data.size(); ++i)
          combined_[t].data[i] += transfer.data[i] * maps.maps[c].data[i];
      }
    }
  }

  std::size_t coils() const { return coils_; }
  std::vector<std::size_t> image_dims() const { return {rows_, cols_}; }
  std::vector<std::size_t> range_dims() const { return {coils_, rows_, cols_}; }

  /// Residual for one target coil.
  ComplexArray residual(std::size_t target, const ComplexArray& m) const {
    ComplexArray tmp({rows_, cols_});
    for (std::size_t i = 0; i < tmp.data.size(); ++i)
      tmp.data[i] = combined_[target].data[i] * m.data[i];
    return dft2(tmp);
  }

  ComplexArray forward(const ComplexArray& m) const {
    ComplexArray out(range_dims());
    for (std::size_t t = 0; t < coils_; ++t) {
      const ComplexArray r = residual(t, m);
      std::copy(r.data.begin(), r.data.end(),
                out.data.begin() + t * rows_ * cols_);
    }
    return out;
  }

  ComplexArray adjoint(const ComplexArray& y) const {
    ComplexArray out({rows_, cols_});
    const double uv = static_cast<double>(rows_) * cols_;
    ComplexArray tmp({rows_, cols_});
    for (std::size_t t = 0; t < coils_; ++t) {
      const cplx* src = y.data.data() + t * rows_ * cols_;
      std::copy(src, src + rows_ * cols_, tmp.data.begin());
      const ComplexArray img = idft2(tmp);
      for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] += std::conj(combined_[t].data[i]) * uv * img.data[i];
    }
    return out;
  }

 private:
  std::size_t coils_, rows_, cols_;
  std::vector<ComplexArray> combined_;  // P_t per target coil
};

/// The two smooth terms of the SPIRiT-regularized objective and their
/// gradient.  gamma arrives in the centered layout and is unshifted once.
class SmoothObjective {
 public:
  SmoothObjective(const EncodingOperator* enc, const SpiritOperator* spirit,
                  ComplexArray b, double lambda_s, double kappa,
                  std::vector<double> gamma_centered)
      : enc_(enc), spirit_(spirit), b_(std::move(b)), lambda_s_(lambda_s),
        kappa_(kappa) {
    const std::size_t n = enc_->image_dims()[0] * enc_->image_dims()[1];
    if (spirit_ && lambda_s_ > 0.0) {
      if (gamma_centered.empty()) gamma_centered.assign(n, 1.0);
      if (gamma_centered.size() != n)
        throw std::invalid_argument("SmoothObjective: gamma length mismatch");
      ComplexArray g(enc_->image_dims());
      for (std::size_t i = 0; i < n; ++i)
        g.data[i] = cplx{gamma_centered[i], 0.0};
      const ComplexArray gu = ifftshift2(g);
      gamma_unshifted_.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        gamma_unshifted_[i] = gu.data[i].real();
    }
  }

  double value(const ComplexArray& m) const {
    const ComplexArray r = enc_->forward(m) - b_;
    double val = 0.5 * norm2(r) * norm2(r);
    if (spirit_ && lambda_s_ > 0.0) {
      for (std::size_t t = 0; t < spirit_->coils(); ++t) {
        const ComplexArray rt = spirit_->residual(t, m);
        val += lambda_s_ / (2.0 * kappa_) * weighted_norm_sq(rt, gamma_unshifted_);
      }
    }
    return val;
  }

  ComplexArray gradient(const ComplexArray& m) const {
    ComplexArray g = enc_->adjoint(enc_->forward(m) - b_);
    if (spirit_ && lambda_s_ > 0.0) {
      ComplexArray ry = spirit_->forward(m);
      const std::size_t n = gamma_unshifted_.size();
      for (std::size_t t = 0; t < spirit_->coils(); ++t)
        for (std::size_t i = 0; i < n; ++i)
          ry.data[t * n + i] *= gamma_unshifted_[i];
      axpy(g, cplx{lambda_s_ / kappa_, 0.0}, spirit_->adjoint(ry));
    }
    return g;
  }

  const std::vector<double>& gamma_unshifted() const { return gamma_unshifted_; }

 private:
  const EncodingOperator* enc_;
  const SpiritOperator* spirit_;
  ComplexArray b_;
  double lambda_s_, kappa_;
  std::vector<double> gamma_unshifted_;
};

}  // namespace mrr

#pragma once

#include <memory>
#include <vector>

#include "refldiff/render.hpp"

namespace refl {

// Measurement operator for posterior sampling: maps a clean estimate in
// diffusion space to a data-fit loss and its gradient. The photometric
// implementation renders through the co-located model; tests substitute
// linear operators with closed-form posteriors.
class Measurement {
public:
    virtual ~Measurement() = default;

    struct Eval {
        double loss = 0.0;
        Grid grad;          // d(loss)/d(x_hat), diffusion space; set iff with_grad
        long covered = 0;   // number of contributing observations
    };

    // `view_subset`, when non-null, restricts the evaluation to those view
    // indices (photometric case); others ignore it.
    virtual Eval evaluate(const Grid& xhat_diffusion, bool with_grad,
                          const std::vector<int>* view_subset = nullptr) const = 0;

    virtual std::size_t view_count() const { return 0; }
};

// Photometric loss of one patch window against pre-transformed views. The
// diffusion -> physical albedo mapping and its Jacobian are applied inside,
// without clamping, so guidance keeps acting outside the nominal range.
class PhotometricMeasurement : public Measurement {
public:
    // Views are full-map observations; they are transformed into the
    // window's local sampling space on construction.
    PhotometricMeasurement(const std::vector<ViewObservation>& views, const PatchWindow& window,
                           Eigen::Index full_h, Eigen::Index full_w, const Lighting& lighting);

    Eval evaluate(const Grid& xhat_diffusion, bool with_grad,
                  const std::vector<int>* view_subset = nullptr) const override;

    std::size_t view_count() const override { return views_.size(); }
    long covered_total() const { return covered_; }

private:
    std::vector<CompactView> views_;
    Lighting lighting_;
    long covered_ = 0;
};

}  // namespace refl

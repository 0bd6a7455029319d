#pragma once

#include <vector>

#include "refldiff/reflectance.hpp"
#include "refldiff/tiler.hpp"
#include "refldiff/view.hpp"

namespace refl {

// Canonical bilinear footprint with the half-texel convention. The anchor
// index is pinned to [0, dim-2] so the fraction stays in [0,1] and border
// lookups clamp consistently.
struct BilinearFootprint {
    Eigen::Index r0 = 0, c0 = 0;
    double fr = 0.0, fc = 0.0;
};

BilinearFootprint bilinear_footprint(Eigen::Index H, Eigen::Index W, double u, double v);

// Samples all channels of `g` at uv (bilinear, clamped borders).
Eigen::VectorXd sample_bilinear(const Grid& g, double u, double v);

// Remaps a view's pixel-to-UV correspondence from the full map into a
// window's local sampling space so that sampling the extracted patch with
// the remapped uv reproduces sampling the full map. Pixels whose bilinear
// footprint is not fully supported by the window become uncovered.
ViewObservation transform_correspondence(const ViewObservation& view, const PatchWindow& window,
                                         Eigen::Index full_h, Eigen::Index full_w);

// Renders one view of a physical-space reflectance grid (7 channels).
// Uncovered pixels are zero. Sampled normals are renormalized before
// shading.
Grid render_patch(const Grid& refl_physical, const ViewObservation& view,
                  const Lighting& lighting);

inline Grid render_view(const ReflectanceMap& refl, const ViewObservation& view,
                        const Lighting& lighting) {
    return render_patch(refl.data, view, lighting);
}

// Sum of squared residuals over covered pixels and channels divided by the
// total covered-pixel count. Throws on zero coverage.
double photometric_loss(const Grid& refl_physical, const std::vector<ViewObservation>& views,
                        const Lighting& lighting);

inline double photometric_loss(const ReflectanceMap& refl,
                               const std::vector<ViewObservation>& views,
                               const Lighting& lighting) {
    return photometric_loss(refl.data, views, lighting);
}

// Analytic d(loss)/d(patch texels) for views already transformed into the
// window's local space. Texels never referenced by a covered pixel get zero
// gradient; zero coverage yields an all-zero gradient.
Grid photometric_grad(const Grid& refl_patch, const PatchWindow& window,
                      const std::vector<ViewObservation>& views, const Lighting& lighting);

// ---- performance path shared by the loss/grad entry points and the DPS
// measurement: per-view compact lists of covered pixels.

struct CoveredPixel {
    double u = 0.0, v = 0.0;      // sampling-space uv of the target grid
    Eigen::Vector3d target = Eigen::Vector3d::Zero();
    Eigen::Vector3d pos = Eigen::Vector3d::Zero();
};

struct CompactView {
    std::vector<CoveredPixel> pixels;
    Eigen::Vector3d camera = Eigen::Vector3d::Zero();
};

CompactView build_compact_view(const ViewObservation& view);

struct LossGrad {
    double loss = 0.0;
    Grid grad;          // empty unless requested
    long covered = 0;   // normalization count
};

// Photometric loss (and optionally its texel gradient) of a physical-space
// grid against compact views. `normalization` overrides the divisor when
// positive; otherwise the total pixel count of the lists is used.
LossGrad photometric_loss_grad(const Grid& refl_physical, const std::vector<CompactView>& views,
                               const Lighting& lighting, bool with_grad,
                               long normalization = -1);

}  // namespace refl

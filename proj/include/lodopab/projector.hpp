#pragma once

#include "lodopab/geometry.hpp"
#include "lodopab/image.hpp"

namespace lodopab {

/// Discrete 2D Radon transform: ray-driven line integrals with bilinear
/// sampling along each ray (step <= half a pixel pitch, trapezoidal
/// accumulation). Rays that miss the image domain yield exactly 0.
/// The result is independent of the number of threads.
Sinogram forward_project(const Image& image, const ScanGeometry& geom);

/// Exact discrete adjoint of forward_project onto the requested grid:
/// the same rays, sample positions and weights, applied in scatter form.
/// The reduction order is fixed, so results do not depend on the number
/// of threads.
Image back_project(const Sinogram& sino, const ScanGeometry& geom,
                   const ImageGrid& grid);

}  // namespace lodopab

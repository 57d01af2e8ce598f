#include "lodopab/image.hpp"

#include "lodopab/errors.hpp"

namespace lodopab {

Image make_image(const ImageGrid& grid, PixelUnit unit) {
  validate(grid);
  return Image{grid, unit, Array2d<double>(grid.height, grid.width)};
}

Sinogram make_sinogram(const ScanGeometry& geom, SinoUnit unit) {
  validate(geom);
  return Sinogram{geom, unit,
                  Array2d<double>(geom.num_angles(), geom.num_detectors())};
}

void validate(const Image& image) {
  validate(image.grid);
  if (image.values.rows() != static_cast<std::size_t>(image.grid.height) ||
      image.values.cols() != static_cast<std::size_t>(image.grid.width))
    throw ContractError("image: value shape does not match grid");
}

void validate(const Sinogram& sino) {
  validate(sino.geometry);
  if (sino.values.rows() != static_cast<std::size_t>(sino.geometry.num_angles()) ||
      sino.values.cols() !=
          static_cast<std::size_t>(sino.geometry.num_detectors()))
    throw ContractError("sinogram: value shape does not match geometry");
}

}  // namespace lodopab

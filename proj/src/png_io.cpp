#include "lodopab/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

#include "lodopab/errors.hpp"

namespace lodopab {

void write_png_gray(const std::filesystem::path& path,
                    const Array2d<double>& values, double lo, double hi) {
  if (values.empty()) throw ContractError("write_png_gray: empty image");
  if (!(hi > lo)) throw ContractError("write_png_gray: window must satisfy hi > lo");

  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(
      std::fopen(path.string().c_str(), "wb"), std::fclose);
  if (!fp) throw IoError("cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng error while writing " + path.string());
  }

  const auto width = static_cast<png_uint_32>(values.cols());
  const auto height = static_cast<png_uint_32>(values.rows());
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const double scale = 255.0 / (hi - lo);
  std::vector<png_byte> row(width);
  // Row 0 of the array is the lowest y; PNG rows run top-down.
  for (png_uint_32 r = 0; r < height; ++r) {
    const double* src = values.row(height - 1 - r);
    for (png_uint_32 c = 0; c < width; ++c) {
      double v = (src[c] - lo) * scale;
      if (v < 0.0) v = 0.0;
      if (v > 255.0) v = 255.0;
      row[c] = static_cast<png_byte>(v + 0.5);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace lodopab

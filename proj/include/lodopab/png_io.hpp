#pragma once

#include <filesystem>

#include "lodopab/array.hpp"

namespace lodopab {

/// 8-bit grayscale PNG with linear windowing: values <= lo map to black,
/// values >= hi to white. Rows are written top-down (row 0 of the file is
/// the highest y).
void write_png_gray(const std::filesystem::path& path,
                    const Array2d<double>& values, double lo, double hi);

}  // namespace lodopab

#include "lodopab/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "lodopab/errors.hpp"

namespace lodopab {

Array2d<double> crop_center(const Array2d<double>& slice,
                            const std::string& slice_name) {
  if (slice.rows() != kSourceSliceSize || slice.cols() != kSourceSliceSize)
    throw IngestError(slice_name,
                      "expected 512x512 input, got " +
                          std::to_string(slice.rows()) + "x" +
                          std::to_string(slice.cols()));
  const int out_size = kSourceSliceSize - 2 * kCropMargin;
  Array2d<double> out(out_size, out_size);
  for (int r = 0; r < out_size; ++r)
    std::memcpy(out.row(r), slice.row(r + kCropMargin) + kCropMargin,
                out_size * sizeof(double));
  return out;
}

Array2d<double> dequantize(const Array2d<double>& hu, RandomStream& rng) {
  Array2d<double> out(hu.rows(), hu.cols());
  for (std::size_t i = 0; i < hu.size(); ++i)
    out.data()[i] = hu.data()[i] + rng.uniform();
  return out;
}

double hu_to_mu(double hu, const PhysicsConstants& c) {
  // Fused form of hu * (mu_water - mu_air)/1000 + mu_water; exact at the
  // water (hu=0) and air (hu=-1000) anchors.
  return (hu * (c.mu_water - c.mu_air) + 1000.0 * c.mu_water) / 1000.0;
}

Array2d<double> hu_to_mu(const Array2d<double>& hu,
                         const PhysicsConstants& c) {
  Array2d<double> out(hu.rows(), hu.cols());
  for (std::size_t i = 0; i < hu.size(); ++i)
    out.data()[i] = hu_to_mu(hu.data()[i], c);
  return out;
}

double mu_to_hu(double mu, const PhysicsConstants& c) {
  return (mu * 1000.0 - 1000.0 * c.mu_water) / (c.mu_water - c.mu_air);
}

double normalize_clip(double mu, const PhysicsConstants& c) {
  const double x = mu / c.mu_max();
  if (x <= 0.0) return 0.0;
  if (x > 1.0) return 1.0;
  return x;
}

Array2d<double> normalize_clip(const Array2d<double>& mu,
                               const PhysicsConstants& c) {
  Array2d<double> out(mu.rows(), mu.cols());
  for (std::size_t i = 0; i < mu.size(); ++i)
    out.data()[i] = normalize_clip(mu.data()[i], c);
  return out;
}

namespace {

std::vector<char> read_file_bytes(const std::filesystem::path& path,
                                  const std::string& slice_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError(slice_name, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return bytes;
}

Array2d<double> int16_le_to_array(const unsigned char* bytes, std::size_t rows,
                                  std::size_t cols, bool is_signed = true) {
  Array2d<double> out(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) {
    const std::uint16_t u =
        static_cast<std::uint16_t>(bytes[2 * i]) |
        (static_cast<std::uint16_t>(bytes[2 * i + 1]) << 8);
    out.data()[i] = is_signed ? static_cast<double>(static_cast<std::int16_t>(u))
                              : static_cast<double>(u);
  }
  return out;
}

}  // namespace

SliceRecord read_slice_raw(const std::filesystem::path& raw_path) {
  const std::string name = raw_path.filename().string();
  const auto bytes = read_file_bytes(raw_path, name);
  const std::size_t expected =
      std::size_t{kSourceSliceSize} * kSourceSliceSize * 2;
  if (bytes.size() != expected)
    throw IngestError(name, "expected " + std::to_string(expected) +
                                " bytes of int16 data, got " +
                                std::to_string(bytes.size()));

  SliceRecord rec;
  rec.source_name = name;
  rec.raw = int16_le_to_array(
      reinterpret_cast<const unsigned char*>(bytes.data()), kSourceSliceSize,
      kSourceSliceSize);

  auto sidecar = raw_path;
  sidecar.replace_extension(".json");
  std::ifstream in(sidecar);
  if (!in)
    throw IngestError(name, "missing sidecar " + sidecar.filename().string());
  nlohmann::json j;
  try {
    in >> j;
    rec.rescale_slope = j.at("rescale_slope").get<double>();
    rec.rescale_intercept = j.at("rescale_intercept").get<double>();
    rec.patient_random_id = j.at("patient_random_id").get<long>();
    rec.z_position = j.value("z_position", 0.0);
  } catch (const nlohmann::json::exception& ex) {
    throw IngestError(name, std::string("bad sidecar: ") + ex.what());
  }
  return rec;
}

void write_slice_raw(const std::filesystem::path& raw_path,
                     const Array2d<double>& values, double rescale_slope,
                     double rescale_intercept, long patient_random_id,
                     double z_position) {
  if (values.rows() != kSourceSliceSize || values.cols() != kSourceSliceSize)
    throw ContractError("write_slice_raw: values must be 512x512");
  std::ofstream out(raw_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + raw_path.string());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto v = static_cast<std::int16_t>(std::llround(values.data()[i]));
    const auto u = static_cast<std::uint16_t>(v);
    const unsigned char le[2] = {static_cast<unsigned char>(u & 0xff),
                                 static_cast<unsigned char>(u >> 8)};
    out.write(reinterpret_cast<const char*>(le), 2);
  }
  auto sidecar = raw_path;
  sidecar.replace_extension(".json");
  nlohmann::json j{{"rescale_slope", rescale_slope},
                   {"rescale_intercept", rescale_intercept},
                   {"patient_random_id", patient_random_id},
                   {"z_position", z_position}};
  std::ofstream js(sidecar);
  if (!js) throw IoError("cannot write " + sidecar.string());
  js << j.dump(2) << "\n";
}

namespace {

// Minimal DICOM parsing: enough to pull PixelData and the rescale pair
// out of uncompressed little-endian files. Anything else is rejected.
class DicomParser {
 public:
  DicomParser(const unsigned char* data, std::size_t size,
              const std::string& name)
      : data_(data), size_(size), name_(name) {}

  SliceRecord parse() {
    // 128-byte preamble + "DICM"; some exporters omit it.
    if (size_ >= 132 && std::memcmp(data_ + 128, "DICM", 4) == 0) pos_ = 132;

    SliceRecord rec;
    rec.source_name = name_;
    bool explicit_vr = true;

    int rows = 0, cols = 0, bits_allocated = 16, pixel_representation = 1;
    const unsigned char* pixel_data = nullptr;
    std::size_t pixel_len = 0;

    while (pos_ + 8 <= size_) {
      const std::uint16_t group = read16();
      const std::uint16_t element = read16();
      // File meta group (0002,xxxx) is always explicit VR LE; the main
      // dataset's VR mode comes from the transfer syntax.
      const bool meta = (group == 0x0002);
      std::uint32_t length = 0;
      char vr[3] = {0, 0, 0};

      if (meta || explicit_vr) {
        require(pos_ + 2 <= size_, "truncated element");
        vr[0] = static_cast<char>(data_[pos_]);
        vr[1] = static_cast<char>(data_[pos_ + 1]);
        pos_ += 2;
        if (long_form_vr(vr)) {
          pos_ += 2;  // reserved
          length = read32();
        } else {
          length = read16();
        }
      } else {
        length = read32();
      }

      if (group == 0x0002 && element == 0x0010) {
        const std::string ts = read_string(length);
        if (ts == "1.2.840.10008.1.2") {
          explicit_vr = false;
        } else if (ts == "1.2.840.10008.1.2.1") {
          explicit_vr = true;
        } else {
          throw IngestError(name_, "unsupported transfer syntax " + ts +
                                       " (only uncompressed little-endian "
                                       "DICOM is readable)");
        }
        continue;
      }

      if (length == 0xffffffff) {
        // Undefined length (sequences); skip item by item.
        if (group == 0x7fe0 && element == 0x0010)
          throw IngestError(name_,
                            "encapsulated PixelData (compressed transfer "
                            "syntax) is not supported");
        skip_undefined_sequence();
        continue;
      }

      require(pos_ + length <= size_, "element extends past end of file");
      const unsigned char* value = data_ + pos_;

      if (group == 0x0028 && element == 0x0010)
        rows = static_cast<int>(peek16(pos_));
      else if (group == 0x0028 && element == 0x0011)
        cols = static_cast<int>(peek16(pos_));
      else if (group == 0x0028 && element == 0x0100)
        bits_allocated = static_cast<int>(peek16(pos_));
      else if (group == 0x0028 && element == 0x0103)
        pixel_representation = static_cast<int>(peek16(pos_));
      else if (group == 0x0028 && element == 0x1052)
        rec.rescale_intercept = parse_decimal(value, length);
      else if (group == 0x0028 && element == 0x1053)
        rec.rescale_slope = parse_decimal(value, length);
      else if (group == 0x7fe0 && element == 0x0010) {
        pixel_data = value;
        pixel_len = length;
      }
      pos_ += length;
    }

    if (pixel_data == nullptr)
      throw IngestError(name_, "no PixelData element found");
    if (bits_allocated != 16)
      throw IngestError(name_, "only 16-bit pixel data is supported");
    if (rows <= 0 || cols <= 0) throw IngestError(name_, "missing Rows/Columns");
    if (pixel_len < static_cast<std::size_t>(rows) * cols * 2)
      throw IngestError(name_, "PixelData shorter than Rows*Columns");

    rec.raw = int16_le_to_array(pixel_data, rows, cols,
                                pixel_representation == 1);
    return rec;
  }

 private:
  static bool long_form_vr(const char* vr) {
    static constexpr const char* kLong[] = {"OB", "OW", "OF", "SQ", "UT", "UN"};
    for (const char* l : kLong)
      if (vr[0] == l[0] && vr[1] == l[1]) return true;
    return false;
  }

  void require(bool ok, const std::string& what) const {
    if (!ok) throw IngestError(name_, what);
  }

  std::uint16_t peek16(std::size_t at) const {
    return static_cast<std::uint16_t>(data_[at]) |
           (static_cast<std::uint16_t>(data_[at + 1]) << 8);
  }
  std::uint16_t read16() {
    require(pos_ + 2 <= size_, "truncated element");
    const std::uint16_t v = peek16(pos_);
    pos_ += 2;
    return v;
  }
  std::uint32_t read32() {
    require(pos_ + 4 <= size_, "truncated element");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | data_[pos_ + i];
    pos_ += 4;
    return v;
  }
  std::string read_string(std::uint32_t length) {
    require(pos_ + length <= size_, "truncated element");
    std::string s(reinterpret_cast<const char*>(data_ + pos_), length);
    pos_ += length;
    while (!s.empty() && (s.back() == '\0' || s.back() == ' ')) s.pop_back();
    return s;
  }
  double parse_decimal(const unsigned char* value, std::uint32_t length) const {
    const std::string s(reinterpret_cast<const char*>(value), length);
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      throw IngestError(name_, "bad decimal string '" + s + "'");
    }
  }

  void skip_undefined_sequence() {
    // Scan items until the sequence delimitation item (FFFE,E0DD).
    int depth = 1;
    while (depth > 0) {
      const std::uint16_t group = read16();
      const std::uint16_t element = read16();
      const std::uint32_t length = read32();
      if (group == 0xfffe && element == 0xe0dd) {
        --depth;
      } else if (group == 0xfffe && element == 0xe000) {
        if (length == 0xffffffff) continue;  // undefined-length item
        require(pos_ + length <= size_, "truncated sequence item");
        pos_ += length;
      } else if (group == 0xfffe && element == 0xe00d) {
        continue;  // item delimiter
      } else {
        require(length != 0xffffffff, "nested undefined length");
        require(pos_ + length <= size_, "truncated sequence");
        pos_ += length;
      }
    }
  }

  const unsigned char* data_;
  std::size_t size_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace

SliceRecord read_slice_dicom(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  const auto bytes = read_file_bytes(path, name);
  DicomParser parser(reinterpret_cast<const unsigned char*>(bytes.data()),
                     bytes.size(), name);
  return parser.parse();
}

SliceRecord read_slice(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".raw") return read_slice_raw(path);
  if (ext == ".dcm") return read_slice_dicom(path);
  throw IngestError(path.filename().string(),
                    "unknown slice format '" + ext + "'");
}

std::vector<std::filesystem::path> list_slices(
    const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".raw" || ext == ".dcm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace lodopab

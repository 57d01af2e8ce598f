#include "lodopab/dataset_io.hpp"

#include <hdf5.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "lodopab/errors.hpp"
#include "lodopab/rng.hpp"

namespace lodopab {

namespace {

// Failures surface as IoError; keep HDF5's own error stack off stderr.
const bool kH5Quiet = [] {
  H5Eset_auto2(H5E_DEFAULT, nullptr, nullptr);
  return true;
}();

std::string shard_filename(const std::string& kind, const std::string& part,
                           int shard_index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", shard_index);
  return kind + "_" + part + "_" + buf + ".hdf5";
}

struct H5Handle {
  hid_t id = H5I_INVALID_HID;
  herr_t (*closer)(hid_t) = nullptr;
  H5Handle() = default;
  H5Handle(hid_t id, herr_t (*closer)(hid_t)) : id(id), closer(closer) {}
  ~H5Handle() { reset(); }
  H5Handle(const H5Handle&) = delete;
  H5Handle& operator=(const H5Handle&) = delete;
  H5Handle(H5Handle&& o) noexcept : id(o.id), closer(o.closer) {
    o.id = H5I_INVALID_HID;
  }
  H5Handle& operator=(H5Handle&& o) noexcept {
    reset();
    id = o.id;
    closer = o.closer;
    o.id = H5I_INVALID_HID;
    return *this;
  }
  void reset() {
    if (id >= 0 && closer != nullptr) closer(id);
    id = H5I_INVALID_HID;
  }
  bool valid() const { return id >= 0; }
};

}  // namespace

struct ShardWriter::Impl {
  std::filesystem::path dir;
  std::string kind, part;
  hsize_t rows, cols;
  int shard_size;

  std::vector<ShardInfo> shards;
  H5Handle file, dataset;
  hsize_t rows_written = 0;  // in the open shard
  bool closed = false;

  void open_shard() {
    const std::string name = shard_filename(kind, part,
                                            static_cast<int>(shards.size()));
    const auto path = dir / name;
    file = H5Handle(
        H5Fcreate(path.string().c_str(), H5F_ACC_TRUNC, H5P_DEFAULT,
                  H5P_DEFAULT),
        H5Fclose);
    if (!file.valid()) throw IoError("cannot create shard " + path.string());

    const hsize_t dims[3] = {0, rows, cols};
    const hsize_t maxdims[3] = {H5S_UNLIMITED, rows, cols};
    H5Handle space(H5Screate_simple(3, dims, maxdims), H5Sclose);
    H5Handle plist(H5Pcreate(H5P_DATASET_CREATE), H5Pclose);
    const hsize_t chunk[3] = {1, rows, cols};  // chunked by row
    H5Pset_chunk(plist.id, 3, chunk);
    dataset = H5Handle(
        H5Dcreate2(file.id, "data", H5T_IEEE_F32LE, space.id, H5P_DEFAULT,
                   plist.id, H5P_DEFAULT),
        H5Dclose);
    if (!dataset.valid())
      throw IoError("cannot create dataset in shard " + path.string());
    shards.push_back({name, 0});
    rows_written = 0;
  }

  void flush_shard() {
    if (!dataset.valid()) return;
    shards.back().count = rows_written;
    dataset.reset();
    file.reset();
  }

  void append(const Array2d<float>& sample) {
    if (sample.rows() != rows || sample.cols() != cols)
      throw ContractError("shard writer: sample shape mismatch");
    if (!dataset.valid()) open_shard();

    const hsize_t new_dims[3] = {rows_written + 1, rows, cols};
    if (H5Dset_extent(dataset.id, new_dims) < 0)
      throw IoError("cannot extend shard " + shards.back().file);

    H5Handle fspace(H5Dget_space(dataset.id), H5Sclose);
    const hsize_t offset[3] = {rows_written, 0, 0};
    const hsize_t count[3] = {1, rows, cols};
    H5Sselect_hyperslab(fspace.id, H5S_SELECT_SET, offset, nullptr, count,
                        nullptr);
    H5Handle mspace(H5Screate_simple(3, count, nullptr), H5Sclose);
    if (H5Dwrite(dataset.id, H5T_NATIVE_FLOAT, mspace.id, fspace.id,
                 H5P_DEFAULT, sample.data()) < 0)
      throw IoError("write failed on shard " + shards.back().file);
    ++rows_written;

    if (rows_written == static_cast<hsize_t>(shard_size)) flush_shard();
  }
};

ShardWriter::ShardWriter(std::filesystem::path dir, std::string kind,
                         std::string part, std::size_t rows, std::size_t cols,
                         int shard_size)
    : impl_(std::make_unique<Impl>()) {
  if (shard_size <= 0)
    throw ContractError("shard writer: shard size must be positive");
  impl_->dir = std::move(dir);
  impl_->kind = std::move(kind);
  impl_->part = std::move(part);
  impl_->rows = rows;
  impl_->cols = cols;
  impl_->shard_size = shard_size;
}

ShardWriter::~ShardWriter() {
  if (impl_ && !impl_->closed) impl_->flush_shard();
}

void ShardWriter::append(const Array2d<float>& sample) {
  impl_->append(sample);
}

std::vector<ShardInfo> ShardWriter::close() {
  impl_->flush_shard();
  impl_->closed = true;
  return impl_->shards;
}

struct ShardReader::Impl {
  std::filesystem::path dir;
  std::string kind, part;
  std::size_t total = 0;
  hsize_t rows = 0, cols = 0;
  int shard_size = kDefaultShardSize;

  mutable H5Handle file, dataset;
  mutable int open_shard = -1;

  void ensure_shard(int shard_index) const {
    if (shard_index == open_shard) return;
    dataset.reset();
    file.reset();
    const auto path = dir / shard_filename(kind, part, shard_index);
    file = H5Handle(
        H5Fopen(path.string().c_str(), H5F_ACC_RDONLY, H5P_DEFAULT), H5Fclose);
    if (!file.valid()) throw IoError("missing shard file " + path.string());
    dataset = H5Handle(H5Dopen2(file.id, "data", H5P_DEFAULT), H5Dclose);
    if (!dataset.valid())
      throw IoError("no 'data' dataset in " + path.string());
    open_shard = shard_index;
  }

  Array2d<float> read(std::size_t index) const {
    if (index >= total)
      throw ContractError("read_sample: index " + std::to_string(index) +
                          " out of range (count " + std::to_string(total) +
                          ")");
    ensure_shard(static_cast<int>(index / shard_size));
    const hsize_t row_in_shard = index % shard_size;

    H5Handle fspace(H5Dget_space(dataset.id), H5Sclose);
    const hsize_t offset[3] = {row_in_shard, 0, 0};
    const hsize_t count[3] = {1, rows, cols};
    H5Sselect_hyperslab(fspace.id, H5S_SELECT_SET, offset, nullptr, count,
                        nullptr);
    H5Handle mspace(H5Screate_simple(3, count, nullptr), H5Sclose);
    Array2d<float> out(rows, cols);
    if (H5Dread(dataset.id, H5T_NATIVE_FLOAT, mspace.id, fspace.id,
                H5P_DEFAULT, out.data()) < 0)
      throw IoError("read failed in shard " +
                    shard_filename(kind, part, open_shard));
    return out;
  }
};

ShardReader::ShardReader(std::filesystem::path dir, std::string kind,
                         std::string part, std::size_t count, std::size_t rows,
                         std::size_t cols, int shard_size)
    : impl_(std::make_unique<Impl>()) {
  impl_->dir = std::move(dir);
  impl_->kind = std::move(kind);
  impl_->part = std::move(part);
  impl_->total = count;
  impl_->rows = rows;
  impl_->cols = cols;
  impl_->shard_size = shard_size;
}

ShardReader::~ShardReader() = default;

std::size_t ShardReader::count() const { return impl_->total; }

Array2d<float> ShardReader::read(std::size_t index) const {
  return impl_->read(index);
}

nlohmann::json to_json(const PartManifest& m) {
  nlohmann::json shards_gt = nlohmann::json::array();
  for (const auto& s : m.ground_truth_shards)
    shards_gt.push_back({{"file", s.file}, {"count", s.count}});
  nlohmann::json shards_obs = nlohmann::json::array();
  for (const auto& s : m.observation_shards)
    shards_obs.push_back({{"file", s.file}, {"count", s.count}});
  return {{"part", m.part},
          {"count", m.count},
          {"shard_size", m.shard_size},
          {"seed", m.seed},
          {"physics", to_json(m.constants)},
          {"geometry", to_json(m.geometry)},
          {"geometry_hash", m.geometry_hash},
          {"ground_truth_grid", to_json(m.ground_truth_grid)},
          {"simulation_grid_size", m.simulation_grid_size},
          {"angle_convention", m.angle_convention},
          {"ground_truth_shards", shards_gt},
          {"observation_shards", shards_obs}};
}

PartManifest manifest_from_json(const nlohmann::json& j) {
  PartManifest m;
  m.part = j.at("part").get<std::string>();
  m.count = j.at("count").get<std::size_t>();
  m.shard_size = j.at("shard_size").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.constants = constants_from_json(j.at("physics"));
  m.geometry = geometry_from_json(j.at("geometry"));
  m.geometry_hash = j.at("geometry_hash").get<std::string>();
  m.ground_truth_grid = grid_from_json(j.at("ground_truth_grid"));
  m.simulation_grid_size = j.at("simulation_grid_size").get<int>();
  m.angle_convention = j.value("angle_convention", "midpoint");
  for (const auto& s : j.at("ground_truth_shards"))
    m.ground_truth_shards.push_back(
        {s.at("file").get<std::string>(), s.at("count").get<std::size_t>()});
  for (const auto& s : j.at("observation_shards"))
    m.observation_shards.push_back(
        {s.at("file").get<std::string>(), s.at("count").get<std::size_t>()});
  return m;
}

void save_manifest(const PartManifest& manifest,
                   const std::filesystem::path& dir) {
  const auto path = dir / ("manifest_" + manifest.part + ".json");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(manifest).dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

PartManifest load_manifest(const std::filesystem::path& dir,
                           const std::string& part) {
  const auto path = dir / ("manifest_" + part + ".json");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    return manifest_from_json(j);
  } catch (const nlohmann::json::exception& ex) {
    throw IoError("bad manifest " + path.string() + ": " + ex.what());
  }
}

PartManifest write_shards(const SampleSource& next, PartManifest manifest,
                          const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::unique_ptr<ShardWriter> gt_writer, obs_writer;
  std::size_t count = 0;
  for (;;) {
    auto sample = next();
    if (!sample) break;
    const auto& [gt, obs] = *sample;
    if (!gt_writer) {
      gt_writer = std::make_unique<ShardWriter>(dir, "ground_truth",
                                                manifest.part, gt.rows(),
                                                gt.cols(), manifest.shard_size);
      obs_writer = std::make_unique<ShardWriter>(
          dir, "observation", manifest.part, obs.rows(), obs.cols(),
          manifest.shard_size);
    }
    gt_writer->append(gt);
    obs_writer->append(obs);
    ++count;
  }
  manifest.count = count;
  if (gt_writer) {
    manifest.ground_truth_shards = gt_writer->close();
    manifest.observation_shards = obs_writer->close();
  }
  save_manifest(manifest, dir);
  return manifest;
}

std::pair<Array2d<float>, Array2d<float>> read_sample(
    const std::filesystem::path& dir, const std::string& part,
    std::size_t index) {
  const PartManifest m = load_manifest(dir, part);
  ShardReader gt(dir, "ground_truth", part, m.count,
                 m.ground_truth_grid.height, m.ground_truth_grid.width,
                 m.shard_size);
  ShardReader obs(dir, "observation", part, m.count,
                  m.geometry.num_angles(), m.geometry.num_detectors(),
                  m.shard_size);
  return {gt.read(index), obs.read(index)};
}

void write_array_hdf5(const std::filesystem::path& path,
                      const Array2d<float>& values) {
  H5Handle file(
      H5Fcreate(path.string().c_str(), H5F_ACC_TRUNC, H5P_DEFAULT,
                H5P_DEFAULT),
      H5Fclose);
  if (!file.valid()) throw IoError("cannot create " + path.string());
  const hsize_t dims[2] = {values.rows(), values.cols()};
  H5Handle space(H5Screate_simple(2, dims, nullptr), H5Sclose);
  H5Handle dataset(
      H5Dcreate2(file.id, "data", H5T_IEEE_F32LE, space.id, H5P_DEFAULT,
                 H5P_DEFAULT, H5P_DEFAULT),
      H5Dclose);
  if (!dataset.valid())
    throw IoError("cannot create dataset in " + path.string());
  if (H5Dwrite(dataset.id, H5T_NATIVE_FLOAT, H5S_ALL, H5S_ALL, H5P_DEFAULT,
               values.data()) < 0)
    throw IoError("write failed for " + path.string());
}

Array2d<float> read_array_hdf5(const std::filesystem::path& path) {
  H5Handle file(
      H5Fopen(path.string().c_str(), H5F_ACC_RDONLY, H5P_DEFAULT), H5Fclose);
  if (!file.valid()) throw IoError("cannot open " + path.string());
  H5Handle dataset(H5Dopen2(file.id, "data", H5P_DEFAULT), H5Dclose);
  if (!dataset.valid()) throw IoError("no 'data' dataset in " + path.string());
  H5Handle space(H5Dget_space(dataset.id), H5Sclose);
  if (H5Sget_simple_extent_ndims(space.id) != 2)
    throw IoError("expected a 2D dataset in " + path.string());
  hsize_t dims[2] = {0, 0};
  H5Sget_simple_extent_dims(space.id, dims, nullptr);
  Array2d<float> out(dims[0], dims[1]);
  if (H5Dread(dataset.id, H5T_NATIVE_FLOAT, H5S_ALL, H5S_ALL, H5P_DEFAULT,
              out.data()) < 0)
    throw IoError("read failed for " + path.string());
  return out;
}

std::size_t probe_shard_count(const std::filesystem::path& dir,
                              const std::string& kind,
                              const std::string& part) {
  std::size_t total = 0;
  for (int shard = 0;; ++shard) {
    const auto path = dir / shard_filename(kind, part, shard);
    if (!std::filesystem::exists(path)) break;
    H5Handle file(
        H5Fopen(path.string().c_str(), H5F_ACC_RDONLY, H5P_DEFAULT), H5Fclose);
    if (!file.valid()) throw IoError("cannot open shard " + path.string());
    H5Handle dataset(H5Dopen2(file.id, "data", H5P_DEFAULT), H5Dclose);
    if (!dataset.valid())
      throw IoError("no 'data' dataset in " + path.string());
    H5Handle space(H5Dget_space(dataset.id), H5Sclose);
    hsize_t dims[3] = {0, 0, 0};
    if (H5Sget_simple_extent_ndims(space.id) != 3)
      throw IoError("unexpected dataset rank in " + path.string());
    H5Sget_simple_extent_dims(space.id, dims, nullptr);
    total += dims[0];
  }
  return total;
}

void write_patient_csv(const std::filesystem::path& dir,
                       const std::string& part,
                       const std::vector<long>& patient_ids) {
  const auto path = dir / ("patient_ids_" + part + ".csv");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "sample_index,patient_random_id\n";
  for (std::size_t i = 0; i < patient_ids.size(); ++i)
    out << i << "," << patient_ids[i] << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<long> read_patient_csv(const std::filesystem::path& dir,
                                   const std::string& part) {
  const auto path = dir / ("patient_ids_" + part + ".csv");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<long> ids;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw IoError("bad patient CSV line: " + line);
    ids.push_back(std::stol(line.substr(comma + 1)));
  }
  return ids;
}

std::vector<std::vector<std::size_t>> split_by_patient(
    const std::vector<long>& patient_ids, const std::vector<double>& fractions,
    std::uint64_t seed) {
  if (fractions.empty())
    throw ContractError("split_by_patient: no fractions given");
  const double total =
      std::accumulate(fractions.begin(), fractions.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9)
    throw ContractError("split_by_patient: fractions must sum to 1");
  for (double f : fractions)
    if (f < 0.0) throw ContractError("split_by_patient: negative fraction");

  // Unique patients, sorted for a canonical order before shuffling.
  std::vector<long> patients(patient_ids);
  std::sort(patients.begin(), patients.end());
  patients.erase(std::unique(patients.begin(), patients.end()),
                 patients.end());
  const std::size_t num_patients = patients.size();
  const std::size_t num_parts = fractions.size();
  if (num_patients < num_parts)
    throw ContractError("split_by_patient: fewer patients than parts");

  // Fisher-Yates with the project stream; std::shuffle is implementation
  // defined and would break cross-platform determinism.
  RandomStream rng(seed);
  for (std::size_t i = num_patients - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(i + 1));
    std::swap(patients[i], patients[j]);
  }

  // Largest-remainder apportionment of patients to parts.
  std::vector<std::size_t> counts(num_parts);
  std::vector<std::pair<double, std::size_t>> remainders(num_parts);
  std::size_t assigned = 0;
  for (std::size_t p = 0; p < num_parts; ++p) {
    const double quota = static_cast<double>(num_patients) * fractions[p];
    counts[p] = static_cast<std::size_t>(std::floor(quota));
    remainders[p] = {quota - std::floor(quota), p};
    assigned += counts[p];
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a,
                                                     const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t i = 0; assigned < num_patients; ++i, ++assigned)
    ++counts[remainders[i % num_parts].second];

  std::vector<std::size_t> part_of_patient_rank(num_patients);
  std::size_t cursor = 0;
  for (std::size_t p = 0; p < num_parts; ++p)
    for (std::size_t i = 0; i < counts[p]; ++i)
      part_of_patient_rank[cursor++] = p;

  std::vector<std::pair<long, std::size_t>> patient_part(num_patients);
  for (std::size_t i = 0; i < num_patients; ++i)
    patient_part[i] = {patients[i], part_of_patient_rank[i]};
  std::sort(patient_part.begin(), patient_part.end());

  auto part_of = [&](long id) {
    auto it = std::lower_bound(
        patient_part.begin(), patient_part.end(), std::make_pair(id, std::size_t{0}),
        [](const auto& a, const auto& b) { return a.first < b.first; });
    return it->second;
  };

  std::vector<std::vector<std::size_t>> parts(num_parts);
  for (std::size_t i = 0; i < patient_ids.size(); ++i)
    parts[part_of(patient_ids[i])].push_back(i);
  return parts;
}

}  // namespace lodopab

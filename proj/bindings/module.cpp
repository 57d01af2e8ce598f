#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lodopab/constants.hpp"
#include "lodopab/fbp.hpp"
#include "lodopab/geometry.hpp"
#include "lodopab/ingest.hpp"
#include "lodopab/metrics.hpp"
#include "lodopab/phantoms.hpp"
#include "lodopab/physics.hpp"
#include "lodopab/projector.hpp"

namespace py = pybind11;
using namespace lodopab;

namespace {

using NpArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array2d<double> to_array(const NpArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2D array");
  Array2d<double> out(a.shape(0), a.shape(1));
  std::memcpy(out.data(), a.data(), sizeof(double) * out.size());
  return out;
}

py::array_t<double> to_numpy(const Array2d<double>& a) {
  py::array_t<double> out({a.rows(), a.cols()});
  std::memcpy(out.mutable_data(), a.data(), sizeof(double) * a.size());
  return out;
}

Image to_image(const NpArray& a, const ImageGrid& grid, PixelUnit unit) {
  Image image{grid, unit, to_array(a)};
  validate(image);
  return image;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Low-dose parallel-beam CT simulation and reconstruction";

  py::class_<ImageGrid>(m, "ImageGrid")
      .def(py::init([](int size, double extent) { return make_grid(size, extent); }),
           py::arg("size"), py::arg("extent") = kDomainHalfWidth)
      .def_readonly("width", &ImageGrid::width)
      .def_readonly("height", &ImageGrid::height)
      .def_readonly("extent", &ImageGrid::extent)
      .def_property_readonly("pixel_pitch", &ImageGrid::pixel_pitch)
      .def("__repr__", [](const ImageGrid& g) {
        return "ImageGrid(" + std::to_string(g.width) + "x" +
               std::to_string(g.height) + ", extent=" +
               std::to_string(g.extent) + ")";
      });

  py::class_<ScanGeometry>(m, "ScanGeometry")
      .def_property_readonly("num_angles", &ScanGeometry::num_angles)
      .def_property_readonly("num_detectors", &ScanGeometry::num_detectors)
      .def_property_readonly("detector_pitch", &ScanGeometry::detector_pitch)
      .def_readonly("detector_half_length",
                    &ScanGeometry::detector_half_length)
      .def_property_readonly(
          "angles",
          [](const ScanGeometry& g) {
            const std::vector<py::ssize_t> shape{
                static_cast<py::ssize_t>(g.angles.size())};
            py::array_t<double> out(shape);
            std::memcpy(out.mutable_data(), g.angles.data(),
                        sizeof(double) * g.angles.size());
            return out;
          })
      .def_property_readonly(
          "detector_positions",
          [](const ScanGeometry& g) {
            const std::vector<py::ssize_t> shape{
                static_cast<py::ssize_t>(g.detector_positions.size())};
            py::array_t<double> out(shape);
            std::memcpy(out.mutable_data(), g.detector_positions.data(),
                        sizeof(double) * g.detector_positions.size());
            return out;
          })
      .def_property_readonly("hash", &geometry_hash);

  m.def("default_geometry", &make_default_geometry,
        "1000 angles, 513 detectors on a sqrt(2)*0.13 m half-length");
  m.def("make_geometry", &make_geometry, py::arg("num_angles"),
        py::arg("num_detectors"), py::arg("half_length"));
  m.def("beam_point", &beam_point, py::arg("s"), py::arg("phi"), py::arg("t"));

  py::class_<PhysicsConstants>(m, "PhysicsConstants")
      .def(py::init<>())
      .def_readwrite("mu_water", &PhysicsConstants::mu_water)
      .def_readwrite("mu_air", &PhysicsConstants::mu_air)
      .def_readwrite("n0", &PhysicsConstants::n0)
      .def_readwrite("min_photon_count", &PhysicsConstants::min_photon_count)
      .def_readwrite("sigma_detector", &PhysicsConstants::sigma_detector)
      .def_property_readonly("mu_max", &PhysicsConstants::mu_max);

  py::class_<EllipsePhantom>(m, "EllipsePhantom");
  m.def("shepp_logan", &shepp_logan, py::arg("extent") = kDomainHalfWidth);
  m.def("uniform_disk", &uniform_disk, py::arg("radius"), py::arg("value"),
        py::arg("cx") = 0.0, py::arg("cy") = 0.0);
  m.def("rasterize",
        [](const EllipsePhantom& p, const ImageGrid& grid) {
          return to_numpy(rasterize(p, grid).values);
        },
        py::arg("phantom"), py::arg("grid"));
  m.def("analytic_sinogram",
        [](const EllipsePhantom& p, const ScanGeometry& geom) {
          return to_numpy(analytic_sinogram(p, geom).values);
        },
        py::arg("phantom"), py::arg("geometry"));

  m.def("forward_project",
        [](const NpArray& image, const ImageGrid& grid,
           const ScanGeometry& geom) {
          const Image img = to_image(image, grid, PixelUnit::kMuPerM);
          Array2d<double> result;
          {
            py::gil_scoped_release release;
            result = forward_project(img, geom).values;
          }
          return to_numpy(result);
        },
        py::arg("image"), py::arg("grid"), py::arg("geometry"),
        "Line integrals of `image` over the scan geometry");
  m.def("back_project",
        [](const NpArray& sino, const ScanGeometry& geom,
           const ImageGrid& grid) {
          const Sinogram s{geom, SinoUnit::kLineIntegral, to_array(sino)};
          Array2d<double> result;
          {
            py::gil_scoped_release release;
            result = back_project(s, geom, grid).values;
          }
          return to_numpy(result);
        },
        py::arg("sinogram"), py::arg("geometry"), py::arg("grid"),
        "Exact adjoint of forward_project");

  m.def("fbp_reconstruct",
        [](const NpArray& sino, const ScanGeometry& geom,
           const ImageGrid& grid) {
          const Sinogram s{geom, SinoUnit::kNormalizedPostLog, to_array(sino)};
          FbpConfig config;
          config.output_grid = grid;
          Array2d<double> result;
          {
            py::gil_scoped_release release;
            result = fbp_reconstruct(s, config).values;
          }
          return to_numpy(result);
        },
        py::arg("sinogram"), py::arg("geometry"), py::arg("grid"),
        "Ram-Lak filtered back-projection");

  m.def("simulate",
        [](const NpArray& ground_truth, const ScanGeometry& geom,
           const PhysicsConstants& constants, std::uint64_t seed,
           int simulation_grid_size, bool poisson_sampling) {
          const auto grid = make_grid(
              static_cast<int>(ground_truth.shape(0)));
          SimulateOptions options;
          options.simulation_grid_size = simulation_grid_size;
          options.poisson_sampling = poisson_sampling;
          const Image gt = to_image(ground_truth, grid, PixelUnit::kNormalized);
          Array2d<double> result;
          {
            py::gil_scoped_release release;
            result = simulate(gt, geom, constants, seed, options).values;
          }
          return to_numpy(result);
        },
        py::arg("ground_truth"), py::arg("geometry"),
        py::arg("constants") = PhysicsConstants{}, py::arg("seed") = 0,
        py::arg("simulation_grid_size") = kSimulationSize,
        py::arg("poisson_sampling") = true,
        "Low-dose measurement simulation of a normalized ground truth");

  m.def("hu_to_mu",
        [](double hu) { return hu_to_mu(hu, PhysicsConstants{}); },
        py::arg("hu"));
  m.def("psnr",
        [](const NpArray& recon, const NpArray& gt) {
          return psnr(to_array(recon), to_array(gt));
        },
        py::arg("reconstruction"), py::arg("ground_truth"));
  m.def("ssim",
        [](const NpArray& recon, const NpArray& gt) {
          return ssim(to_array(recon), to_array(gt));
        },
        py::arg("reconstruction"), py::arg("ground_truth"));

  m.attr("MU_MAX") = PhysicsConstants{}.mu_max();
  m.attr("GROUND_TRUTH_SIZE") = kGroundTruthSize;
  m.attr("SIMULATION_SIZE") = kSimulationSize;
}

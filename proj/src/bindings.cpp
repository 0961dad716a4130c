#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "atsearch/bench.hpp"
#include "atsearch/beta.hpp"
#include "atsearch/engine.hpp"
#include "atsearch/errors.hpp"
#include "atsearch/features.hpp"
#include "atsearch/lattice.hpp"
#include "atsearch/models.hpp"
#include "atsearch/rng.hpp"
#include "atsearch/scene.hpp"
#include "atsearch/version.hpp"

namespace py = pybind11;
using namespace atsearch;

namespace {

py::object pose_obj(const Pose& pose) {
    if (pose.absent) return py::none();
    return py::make_tuple(pose.x, pose.y, pose.s);
}

py::tuple rect_obj(const Rect& r) { return py::make_tuple(r.x, r.y, r.w, r.h); }

py::dict detection_dict(const Detection& det) {
    py::dict d;
    d["pose"] = pose_obj(det.pose);
    d["box"] = rect_obj(det.box);
    d["confidence"] = det.confidence;
    return d;
}

py::dict search_image(const GrayImage& image, const SearchConfig& config,
                      const ModelBundle& bundle,
                      const std::vector<std::tuple<int, int, double>>& targets, bool multi) {
    std::vector<GroundTruthOracle::Target> planted;
    planted.reserve(targets.size());
    for (const auto& [x, y, size] : targets) planted.push_back({x, y, size});
    GroundTruthOracle oracle(std::move(planted), config);

    py::dict out;
    if (!multi) {
        const SearchResult res =
            run_single(image, config, bundle.models, bundle.table, oracle);
        out["outcome"] = outcome_name(res.outcome);
        out["pose"] = res.detection ? pose_obj(res.detection->pose) : py::none();
        out["box"] = res.detection ? py::object(rect_obj(res.detection->box)) : py::none();
        out["confidence"] = res.detection ? res.detection->confidence : 0.0;
        out["oracle_evals"] = res.oracle_evals;
        out["soft_evals"] = res.soft_evals;
        out["steps"] = res.steps;
    } else {
        const MultiResult res = run_multi(image, config, bundle.models, bundle.table, oracle);
        out["outcome"] = res.budget_exhausted ? "budget_exhausted"
                         : res.detections.empty() ? "no_target"
                                                  : "detected";
        py::list dets;
        for (const Detection& det : res.detections) dets.append(detection_dict(det));
        out["detections"] = dets;
        out["oracle_evals"] = res.oracle_evals;
        out["soft_evals"] = res.soft_evals;
        out["steps"] = res.steps;
    }
    return out;
}

ModelBundle train_bundle(const std::vector<std::pair<GrayImage, std::vector<TargetSpec>>>& scenes,
                         const SearchConfig& config, std::int64_t samples, std::uint64_t seed) {
    std::vector<TrainScene> train;
    train.reserve(scenes.size());
    for (const auto& [image, targets] : scenes) train.push_back({image, targets});
    ModelBundle bundle;
    bundle.seed = seed;
    bundle.models = train_models(train, config, samples, seed);
    bundle.table = build_distance_table(bundle.models, config.mc_samples, config.mc_seed);
    return bundle;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sequential pose search with a sparse oracle budget";
    m.attr("__version__") = kVersion;
    m.attr("SOFT_FAMILY_COUNT") = kSoftFamilyCount;

    py::register_exception<TrainingCoverageError>(m, "TrainingCoverageError",
                                                  PyExc_ValueError);
    py::register_exception<ModelCoverageError>(m, "ModelCoverageError", PyExc_ValueError);
    py::register_exception<DegenerateSampleError>(m, "DegenerateSampleError",
                                                  PyExc_ValueError);

    py::class_<ScaleInterval>(m, "ScaleInterval")
        .def(py::init([](double lo, double hi) { return ScaleInterval{lo, hi}; }),
             py::arg("lo"), py::arg("hi"))
        .def_readwrite("lo", &ScaleInterval::lo)
        .def_readwrite("hi", &ScaleInterval::hi)
        .def("__repr__", [](const ScaleInterval& iv) {
            return "ScaleInterval(" + std::to_string(iv.lo) + ", " + std::to_string(iv.hi) + ")";
        });

    py::class_<SearchConfig>(m, "SearchConfig")
        .def(py::init<>())
        .def_readwrite("scale_intervals", &SearchConfig::scale_intervals)
        .def_readwrite("tau", &SearchConfig::tau)
        .def_readwrite("epsilon", &SearchConfig::epsilon)
        .def_readwrite("gamma", &SearchConfig::gamma)
        .def_readwrite("max_steps", &SearchConfig::max_steps)
        .def_readwrite("lambda_", &SearchConfig::lambda)
        .def_readwrite("mc_seed", &SearchConfig::mc_seed)
        .def_readwrite("mc_samples", &SearchConfig::mc_samples)
        .def_readwrite("edge_threshold", &SearchConfig::edge_threshold)
        .def("scales", &SearchConfig::scales)
        .def("validate", &SearchConfig::validate)
        .def("size_grid", &SearchConfig::size_grid)
        .def("sizes_in_interval", &SearchConfig::sizes_in_interval, py::arg("s"))
        .def("interval_of_size", &SearchConfig::interval_of_size, py::arg("size"))
        .def("pose_space_size", &SearchConfig::pose_space_size, py::arg("width"),
             py::arg("height"))
        .def_static("defaults_for", &SearchConfig::defaults_for, py::arg("width"),
                    py::arg("height"))
        .def_static("preset_caltech", &SearchConfig::preset_caltech);

    m.def("load_config", &load_config, py::arg("path"));
    m.def("save_config", &save_config, py::arg("config"), py::arg("path"));
    m.def("config_to_json", &config_to_json, py::arg("config"));
    m.def("config_from_json", &config_from_json, py::arg("text"));

    py::class_<TargetSpec>(m, "TargetSpec")
        .def(py::init([](int x, int y, int size) { return TargetSpec{x, y, size}; }),
             py::arg("x"), py::arg("y"), py::arg("size"))
        .def_readwrite("x", &TargetSpec::x)
        .def_readwrite("y", &TargetSpec::y)
        .def_readwrite("size", &TargetSpec::size);

    py::class_<SceneSpec>(m, "SceneSpec")
        .def(py::init<>())
        .def_readwrite("width", &SceneSpec::width)
        .def_readwrite("height", &SceneSpec::height)
        .def_readwrite("targets", &SceneSpec::targets)
        .def_readwrite("background_density", &SceneSpec::background_density)
        .def_readwrite("target_density", &SceneSpec::target_density)
        .def_readwrite("clutter_blobs", &SceneSpec::clutter_blobs)
        .def_readwrite("seed", &SceneSpec::seed);

    py::class_<GrayImage>(m, "GrayImage")
        .def(py::init<int, int, std::uint8_t>(), py::arg("width"), py::arg("height"),
             py::arg("fill") = 0)
        .def_readonly("width", &GrayImage::width)
        .def_readonly("height", &GrayImage::height)
        .def("at", [](const GrayImage& img, int x, int y) { return img.at(x, y); },
             py::arg("x"), py::arg("y"))
        .def("set_at",
             [](GrayImage& img, int x, int y, std::uint8_t v) { img.at(x, y) = v; },
             py::arg("x"), py::arg("y"), py::arg("value"))
        .def("to_bytes", [](const GrayImage& img) {
            return py::bytes(reinterpret_cast<const char*>(img.data.data()), img.data.size());
        });

    m.def("save_pgm", &save_pgm, py::arg("image"), py::arg("path"));
    m.def("load_pgm", &load_pgm, py::arg("path"));

    m.def("synth_scene", &synth_scene, py::arg("spec"));
    m.def(
        "random_scene_spec",
        [](std::uint64_t seed, int width, int height, int n_targets, const SearchConfig& cfg) {
            Rng rng(seed);
            return random_scene_spec(rng, width, height, n_targets, cfg);
        },
        py::arg("seed"), py::arg("width"), py::arg("height"), py::arg("n_targets"),
        py::arg("config"));

    py::class_<Lattice>(m, "Lattice")
        .def_property_readonly("width", &Lattice::width)
        .def_property_readonly("height", &Lattice::height)
        .def_property_readonly("depth", &Lattice::depth)
        .def("cells_at_level", &Lattice::cells_at_level, py::arg("level"))
        .def("cell_rect",
             [](const Lattice& lat, int level, std::int64_t index) {
                 return rect_obj(lat.cell_rect({level, index}));
             },
             py::arg("level"), py::arg("index"));
    m.def("build_lattice", &build_lattice, py::arg("width"), py::arg("height"));

    py::enum_<Orientation>(m, "Orientation")
        .value("ANY", Orientation::Any)
        .value("DEG0", Orientation::Deg0)
        .value("DEG45", Orientation::Deg45)
        .value("DEG90", Orientation::Deg90)
        .value("DEG135", Orientation::Deg135);

    py::class_<IntegralSet>(m, "IntegralSet")
        .def("count",
             [](const IntegralSet& set, std::tuple<int, int, int, int> rect, Orientation o) {
                 const auto& [x, y, w, h] = rect;
                 return set.count({x, y, w, h}, o);
             },
             py::arg("rect"), py::arg("orientation") = Orientation::Any)
        .def("edge_proportion",
             [](const IntegralSet& set, std::tuple<int, int, int, int> rect, Orientation o) {
                 const auto& [x, y, w, h] = rect;
                 return edge_proportion(set, {x, y, w, h}, o);
             },
             py::arg("rect"), py::arg("orientation") = Orientation::Any);
    m.def("detect_edges", &detect_edges, py::arg("image"),
          py::arg("threshold") = kDefaultEdgeThreshold);

    m.def(
        "fit_beta_mle",
        [](const std::vector<double>& samples) {
            const BetaModel fit = fit_beta_mle(samples);
            return py::make_tuple(fit.alpha, fit.beta);
        },
        py::arg("samples"));
    m.def(
        "beta_pdf",
        [](double alpha, double beta, double x) { return beta_pdf({alpha, beta}, x); },
        py::arg("alpha"), py::arg("beta"), py::arg("x"));
    m.def(
        "l2_distance",
        [](double a_alpha, double a_beta, double b_alpha, double b_beta, std::int64_t n,
           std::uint64_t seed) {
            return l2_distance({a_alpha, a_beta}, {b_alpha, b_beta}, n, seed);
        },
        py::arg("a_alpha"), py::arg("a_beta"), py::arg("b_alpha"), py::arg("b_beta"),
        py::arg("n_samples") = 100000, py::arg("seed") = 1);

    py::class_<ModelBundle>(m, "ModelBundle")
        .def_readonly("seed", &ModelBundle::seed)
        .def_property_readonly("levels",
                               [](const ModelBundle& b) { return b.models.levels(); })
        .def_property_readonly("scales",
                               [](const ModelBundle& b) { return b.models.scales(); })
        .def_property_readonly("soft_families",
                               [](const ModelBundle& b) { return b.models.soft_families(); });

    m.def("train", &train_bundle, py::arg("scenes"), py::arg("config"),
          py::arg("samples") = kDefaultTrainingSamples, py::arg("seed") = 1,
          "Fit response models from (image, targets) pairs and build the distance table");
    m.def("save_models", &save_models, py::arg("bundle"), py::arg("path"));
    m.def("load_models", &load_models, py::arg("path"));
    m.def("file_hash_hex", &file_hash_hex, py::arg("path"));

    m.def("search", &search_image, py::arg("image"), py::arg("config"), py::arg("bundle"),
          py::arg("targets"), py::arg("multi") = false,
          "Run the sequential search against a planted ground-truth oracle");
}

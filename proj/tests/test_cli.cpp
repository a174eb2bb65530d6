#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ganaudit/cli.hpp"
#include "ganaudit/dataset.hpp"
#include "ganaudit/density.hpp"
#include "ganaudit/models.hpp"
#include "ganaudit/svg.hpp"
#include "json.hpp"

using namespace ganaudit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path work_root() {
    fs::path dir = fs::temp_directory_path() / "ganaudit_cli_test";
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args) {
    std::string cmd = std::string(GANAUDIT_CLI_PATH) + " " + args + " >/dev/null 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

int run_capture_stderr(const std::string& args, std::string& err) {
    fs::path errfile = work_root() / "stderr.txt";
    std::string cmd = std::string(GANAUDIT_CLI_PATH) + " " + args + " >/dev/null 2>" +
                      errfile.string();
    int status = std::system(cmd.c_str());
    std::ifstream in(errfile);
    std::stringstream ss;
    ss << in.rdbuf();
    err = ss.str();
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("cli: spiral demo pipeline end to end") {
    fs::path root = work_root() / "spiral";
    fs::remove_all(root);

    REQUIRE(run("synth --kind spiral --n 12 --sigma2 0.1 --seed 3 --out " +
                (root / "synth").string()) == 0);
    REQUIRE(fs::exists(root / "synth" / "model" / "model.json"));
    REQUIRE(fs::exists(root / "synth" / "data" / "data.gten"));
    REQUIRE(fs::exists(root / "synth" / "manifest.json"));

    // ll with a short chain, writing the convergence trace
    std::string ll_args = "ll --model " + (root / "synth" / "model").string() + " --data " +
                          (root / "synth" / "data").string() +
                          " --sigma2 0.1 --steps 60 --chains 2 --seed 5 --trace --out " +
                          (root / "ll").string();
    REQUIRE(run(ll_args) == 0);
    CsvTable ll = read_csv((root / "ll" / "ll.csv").string());
    CHECK(ll.rows.size() == 12);
    CHECK(ll.header[ll.column("ll_nats")] == "ll_nats");
    CsvTable trace = read_csv((root / "ll" / "trace.csv").string());
    CHECK(trace.rows.size() == 12 * 60);

    // deterministic rerun is byte-identical
    fs::path rerun = root / "ll2";
    REQUIRE(run("ll --model " + (root / "synth" / "model").string() + " --data " +
                (root / "synth" / "data").string() +
                " --sigma2 0.1 --steps 60 --chains 2 --seed 5 --trace --out " +
                rerun.string()) == 0);
    CHECK(slurp(root / "ll" / "ll.csv") == slurp(rerun / "ll.csv"));
    CHECK(slurp(root / "ll" / "trace.csv") == slurp(rerun / "trace.csv"));

    // manifest echoes the resolved config and carries a hash
    json manifest = json::parse(slurp(root / "ll" / "manifest.json"));
    CHECK(manifest["command"] == "ll");
    CHECK(manifest["options"]["ais"]["steps"] == 60);
    CHECK(manifest["options"]["sigma2_resolved"] == 0.1);
    CHECK(manifest["config_hash"].get<std::string>().size() == 16);

    // histogram plot from the ll csv
    REQUIRE(run("plot --in " + (root / "ll" / "ll.csv").string() +
                " --value-col ll_nats --group-col group --bins 10 --out " +
                (root / "plot").string()) == 0);
    std::string svg = slurp(root / "plot" / "histogram.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("stroke-dasharray") != std::string::npos);  // mean line
}

TEST_CASE("cli: fit-ppca, project, classify, outlier on two-class data") {
    fs::path root = work_root() / "twoclass";
    fs::remove_all(root);

    REQUIRE(run("synth --kind two-class-ppca --n 120 --n-test 20 --dim 8 --latent-k 2 "
                "--sigma2 0.05 --mean-scale 2.0 --seed 11 --out " +
                (root / "synth").string()) == 0);
    fs::path train = root / "synth" / "train";
    fs::path test = root / "synth" / "test";
    REQUIRE(fs::exists(train / "data.gten"));

    REQUIRE(run("fit-ppca --data " + train.string() + " --k 2 --label 0 --name class0 --out " +
                (root / "m0").string()) == 0);
    REQUIRE(run("fit-ppca --data " + train.string() + " --k 2 --label 1 --name class1 --out " +
                (root / "m1").string()) == 0);
    LoadedModel m0 = load_model((root / "m0").string());
    CHECK(m0.name == "class0");
    CHECK(m0.sigma2.has_value());

    // projection of class-0 generated samples is tight
    REQUIRE(run("sample --model " + (root / "m0").string() + " --n 10 --sigma2 0 --seed 2 "
                "--group generated --out " + (root / "gen0").string()) == 0);
    REQUIRE(run("project --model " + (root / "m0").string() + " --data " +
                (root / "gen0").string() + " --iterations 300 --restarts 2 --init-pool 100 "
                "--seed 4 --workers 2 --out " + (root / "proj").string()) == 0);
    CsvTable proj = read_csv((root / "proj" / "projection.csv").string());
    CHECK(proj.rows.size() == 10);
    std::size_t err_col = proj.column("error");
    for (const auto& row : proj.rows) CHECK(std::stod(row[err_col]) < 1e-2);

    // 1nn classification is near-perfect on well-separated classes
    REQUIRE(run("classify --method 1nn --train " + train.string() + " --data " +
                test.string() + " --seed 6 --out " + (root / "cls1nn").string()) == 0);
    json summary = json::parse(slurp(root / "cls1nn" / "summary.json"));
    CHECK(summary["accuracy"].get<double>() >= 0.95);

    // generative classification via AIS
    REQUIRE(run("classify --method ll --model 0=" + (root / "m0").string() + " --model 1=" +
                (root / "m1").string() + " --data " + test.string() +
                " --sigma2 model --steps 80 --chains 2 --seed 7 --workers 2 --out " +
                (root / "clsll").string()) == 0);
    json llsum = json::parse(slurp(root / "clsll" / "summary.json"));
    CHECK(llsum["accuracy"].get<double>() >= 0.9);

    // outlier detection: shifted cluster vs held-out inliers
    REQUIRE(run("synth --kind shifted-cluster --n 15 --dim 8 --shift 4 --sigma2 0.05 "
                "--seed 13 --out " + (root / "ood").string()) == 0);
    REQUIRE(run("outlier --method projection --model " + (root / "m0").string() +
                " --inliers " + (root / "gen0").string() + " --outliers " +
                (root / "ood" / "data").string() +
                " --iterations 200 --restarts 2 --init-pool 80 --seed 9 --out " +
                (root / "od").string()) == 0);
    json odsum = json::parse(slurp(root / "od" / "summary.json"));
    CHECK(odsum["auc"].get<double>() >= 0.95);
}

TEST_CASE("cli: typicality report and cv statistics") {
    fs::path root = work_root() / "typ";
    fs::remove_all(root);

    // constant-ish model: a 16x16 single-color world
    REQUIRE(run("synth --kind single-color --n 30 --height 16 --width 16 --value 0.5 "
                "--seed 3 --out " + (root / "flat").string()) == 0);
    Dataset flat = load_dataset((root / "flat" / "data").string());
    REQUIRE(flat.samples.size() == 30);
    CHECK(flat.samples[0].shape == std::vector<std::size_t>{16, 16});
    for (double v : flat.samples[0].data) CHECK(v == 0.5);

    // cv of constant images is zero
    REQUIRE(run("cv --data " + (root / "flat" / "data").string() + " --out " +
                (root / "cv").string()) == 0);
    CsvTable cv = read_csv((root / "cv" / "cv.csv").string());
    for (const auto& row : cv.rows) CHECK(std::stod(row[cv.column("cv")]) == 0.0);

    // typicality: model generates its own pool; self group is a member
    GeneratorModel constant = make_constant_model(flat.samples[0]);
    save_model((root / "cmodel").string(), constant, "flat", 0.25);

    // ll on a constant model reproduces the closed form exactly
    REQUIRE(run("sample --model " + (root / "cmodel").string() +
                " --n 6 --sigma2 0.25 --seed 19 --group probe --out " +
                (root / "probe").string()) == 0);
    REQUIRE(run("ll --model " + (root / "cmodel").string() + " --data " +
                (root / "probe").string() + " --sigma2 0.25 --steps 5 --chains 1 --seed 20 "
                "--out " + (root / "llconst").string()) == 0);
    Dataset probe = load_dataset((root / "probe").string());
    CsvTable llc = read_csv((root / "llconst" / "ll.csv").string());
    std::size_t ll_col = llc.column("ll_nats");
    for (std::size_t i = 0; i < probe.samples.size(); ++i) {
        double expect = log_obs(probe.samples[i], constant.constant_output, 0.25);
        CHECK(std::stod(llc.rows[i][ll_col]) == doctest::Approx(expect).epsilon(1e-9));
    }
    REQUIRE(run("sample --model " + (root / "cmodel").string() +
                " --n 50 --sigma2 0.25 --seed 21 --group self --out " +
                (root / "self").string()) == 0);
    REQUIRE(run("typicality --model " + (root / "cmodel").string() +
                " --sigma2 model --group self=" + (root / "self").string() +
                " --n 300 --steps 8 --chains 1 --bootstrap 4000 --seed 23 --out " +
                (root / "typ").string()) == 0);
    json report = json::parse(slurp(root / "typ" / "report.json"));
    CHECK(report["groups"][0]["member"].get<bool>());
    CHECK(report["epsilon_nats"].get<double>() > 0.0);
    CsvTable lls = read_csv((root / "typ" / "lls.csv").string());
    CHECK(lls.rows.size() == 50);
}

TEST_CASE("cli: config file merges under explicit flags") {
    fs::path root = work_root() / "config";
    fs::remove_all(root);
    fs::create_directories(root);

    json cfg;
    cfg["kind"] = "single-color";
    cfg["n"] = 7;
    cfg["value"] = 0.25;
    cfg["out"] = (root / "from_config").string();
    std::ofstream(root / "cfg.json") << cfg.dump();

    // --n on the command line overrides the config value
    REQUIRE(run("synth --config " + (root / "cfg.json").string() + " --n 9 --seed 2") == 0);
    Dataset ds = load_dataset((root / "from_config" / "data").string());
    CHECK(ds.samples.size() == 9);
    for (double v : ds.samples[0].data) CHECK(v == 0.25);

    // unknown config keys are rejected by name
    json bad = cfg;
    bad["not-a-flag"] = 1;
    std::ofstream(root / "bad.json") << bad.dump();
    std::string err;
    int code = run_capture_stderr("synth --config " + (root / "bad.json").string(), err);
    CHECK(code != 0);
    CHECK(err.find("not-a-flag") != std::string::npos);
}

TEST_CASE("make_synthetic: two-class means match the requested scale") {
    fs::path root = work_root() / "synthlib";
    fs::remove_all(root);
    SyntheticParams p;
    p.n = 4000;
    p.n_test = 10;
    p.dim = 8;
    p.latent_k = 2;
    p.sigma2 = 0.05;
    p.mean_scale = 3.0;
    make_synthetic(SyntheticKind::TwoClassPpca, p, 77, root.string());
    Dataset train = load_dataset((root / "train").string());
    REQUIRE(train.samples.size() == 8000);

    // per-coordinate class means within 3 standard errors of +-3
    for (int label = 0; label < 2; ++label) {
        std::vector<double> mean(8, 0.0);
        std::vector<double> var(8, 0.0);
        int n = 0;
        for (std::size_t i = 0; i < train.samples.size(); ++i) {
            if (train.labels[i] != label) continue;
            ++n;
            for (int d = 0; d < 8; ++d) mean[d] += train.samples[i].data[d];
        }
        for (double& v : mean) v /= n;
        for (std::size_t i = 0; i < train.samples.size(); ++i) {
            if (train.labels[i] != label) continue;
            for (int d = 0; d < 8; ++d) {
                double dv = train.samples[i].data[d] - mean[d];
                var[d] += dv * dv;
            }
        }
        double expect = label == 0 ? 3.0 : -3.0;
        for (int d = 0; d < 8; ++d) {
            double se = std::sqrt(var[d] / n / n);
            CHECK(std::fabs(mean[d] - expect) <= 3.0 * se);
        }
    }
}

TEST_CASE("cli: synth is byte-deterministic under a fixed seed") {
    fs::path root = work_root() / "synthdet";
    fs::remove_all(root);
    REQUIRE(run("synth --kind shifted-cluster --n 20 --dim 6 --seed 9 --out " +
                (root / "a").string()) == 0);
    REQUIRE(run("synth --kind shifted-cluster --n 20 --dim 6 --seed 9 --out " +
                (root / "b").string()) == 0);
    CHECK(slurp(root / "a" / "data" / "data.gten") == slurp(root / "b" / "data" / "data.gten"));
    REQUIRE(run("synth --kind shifted-cluster --n 20 --dim 6 --seed 10 --out " +
                (root / "c").string()) == 0);
    CHECK(slurp(root / "a" / "data" / "data.gten") != slurp(root / "c" / "data" / "data.gten"));
}

TEST_CASE("svg histogram: band width is 2 epsilon through the axis transform") {
    fs::path root = work_root() / "svg";
    fs::create_directories(root);
    SvgGroupSeries g{"g", {0.0, 10.0}};
    SvgHistogramSpec spec;
    spec.bins = 5;
    spec.has_band = true;
    spec.band_center = 5.0;
    spec.band_epsilon = 2.0;
    fs::path svg = root / "band.svg";
    emit_svg_histogram(svg.string(), {g}, spec);
    std::string body = slurp(svg);

    // documented transform: range [0,10] padded 2% each side, panel width 820
    double lo = -0.2, hi = 10.2, pw = 900.0 - 60.0 - 20.0;
    double expect = 2.0 * spec.band_epsilon / (hi - lo) * pw;
    auto at = body.find("#ffd54d");
    REQUIRE(at != std::string::npos);
    auto wpos = body.rfind("width=\"", at);
    REQUIRE(wpos != std::string::npos);
    double got = std::stod(body.substr(wpos + 7));
    CHECK(got == doctest::Approx(expect).epsilon(1e-4));
}

TEST_CASE("cli: scatter plot from cv output") {
    fs::path root = work_root() / "scatter";
    fs::remove_all(root);
    fs::create_directories(root);
    std::ofstream(root / "points.csv") << "sample_id,cv,ll_nats\n0,0.1,-3\n1,0.4,-9\n2,0.2,-5\n";
    REQUIRE(run("plot --scatter --in " + (root / "points.csv").string() +
                " --x-col cv --y-col ll_nats --out " + (root / "out").string()) == 0);
    std::string svg = slurp(root / "out" / "scatter.svg");
    CHECK(svg.find("<circle") != std::string::npos);
    CHECK(svg.find("ll_nats") != std::string::npos);
}

TEST_CASE("cli: errors are machine-readable json records") {
    std::string err;
    int code = run_capture_stderr("ll --model /nope --data /nada --out /tmp/x", err);
    CHECK(code != 0);
    json record = json::parse(err);
    CHECK(record["error"]["kind"] == "runtime");
    CHECK(record["error"]["command"] == "ll");
    CHECK(record["error"]["message"].get<std::string>().find("nope") != std::string::npos);

    code = run_capture_stderr("frobnicate --out /tmp/x", err);
    CHECK(code != 0);
    CHECK(json::parse(err)["error"]["kind"] == "usage");

    // sigma2 validation names the field
    fs::path root = work_root() / "sigerr";
    fs::remove_all(root);
    REQUIRE(run("synth --kind spiral --n 4 --seed 1 --out " + (root / "s").string()) == 0);
    code = run_capture_stderr("ll --model " + (root / "s" / "model").string() + " --data " +
                                  (root / "s" / "data").string() +
                                  " --sigma2 banana --out " + (root / "out").string(),
                              err);
    CHECK(code != 0);
    CHECK(json::parse(err)["error"]["message"].get<std::string>().find("--sigma2") !=
          std::string::npos);
}

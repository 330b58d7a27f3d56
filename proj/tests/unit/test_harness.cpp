#include "pcecal/harness.hpp"
#include "pcecal/io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

using namespace pcecal;
using oracle::code_of;
namespace fs = std::filesystem;

namespace {

// Truth over two canonical coordinates: graded terms (0,0) (1,0) (0,1) (2,0) (1,1) (0,2).
PCExpansion quadratic_truth() {
    Vector e(6);
    e << 1.0, 2.0, -1.0, 0.5, 3.0, 0.25;
    return PCExpansion(PCBasis(2, 2), e);
}

ParameterSpace physical_box() { return ParameterSpace({{"a", 0.0, 2.0, std::nullopt}, {"b", -1.0, 3.0, std::nullopt}}); }

// Shell model that maps its physical inputs back to canonical ones and evaluates the quadratic truth.
const std::string mock_command =
    "awk -F' = ' '{v[$1]=$2} END{x=(2*v[\"a\"]-2)/(-2); y=(2*v[\"b\"]-2)/(-4);"
    " printf \"E = %.17g\\n\", 1+2*x-y+0.5*(3*x*x-1)/2+3*x*y+0.25*(3*y*y-1)/2}' input.txt > output.txt";

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Design small_design(std::size_t n, std::uint64_t seed) { return random_design(2, n, seed); }

}  // namespace

TEST(Synthetic, PlantedNoiseFreeIsExact) {
    const auto truth = quadratic_truth();
    const auto m = SyntheticModel::planted(truth);
    EXPECT_EQ(m.kind(), SyntheticKind::planted_polynomial);
    const auto d = small_design(200, 3);
    const Vector v = evaluate_synthetic(m, d.nodes);
    for (Eigen::Index q = 0; q < d.nodes.rows(); ++q) {
        const double x = d.nodes(q, 0), y = d.nodes(q, 1);
        const double ref = 1 + 2 * x - y + 0.5 * (3 * x * x - 1) / 2 + 3 * x * y + 0.25 * (3 * y * y - 1) / 2;
        EXPECT_NEAR(v[q], ref, 1e-13);
    }
}

TEST(Synthetic, HashNoiseIsDeterministic) {
    const auto m = SyntheticModel::smooth(SyntheticModel::default_noise_sigma, 17);
    EXPECT_EQ(m.kind(), SyntheticKind::noisy_smooth);
    const auto d = random_design(5, 500, 9);
    const Vector a = evaluate_synthetic(m, d.nodes), b = evaluate_synthetic(m, d.nodes);
    EXPECT_EQ(a, b);
    const std::vector<double> xi{0.1, -0.2, 0.3, 0.4, -0.5};
    EXPECT_EQ(hash_normal(3, xi), hash_normal(3, xi));
    EXPECT_NE(hash_normal(3, xi), hash_normal(4, xi));
    // Signed zero hashes like zero.
    EXPECT_EQ(hash_normal(1, std::vector<double>{0.0}), hash_normal(1, std::vector<double>{-0.0}));
}

TEST(Synthetic, HashNoiseIsStandardNormal) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<> u(-1.0, 1.0);
    std::vector<double> z(100'000);
    for (auto& v : z) {
        const std::vector<double> xi{u(rng), u(rng), u(rng)};
        v = hash_normal(11, xi);
    }
    EXPECT_GT(oracle::ks_pvalue(z, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }), 0.01);
}

TEST(Synthetic, InfinitesimalPerturbationDecorrelates) {
    const double sigma = SyntheticModel::default_noise_sigma;
    const auto m = SyntheticModel::smooth(sigma, 23);
    const auto d = random_design(5, 20'000, 4);
    std::vector<double> diff, n1, n2;
    for (Eigen::Index q = 0; q < d.nodes.rows(); ++q) {
        std::vector<double> x(d.nodes.row(q).begin(), d.nodes.row(q).end());
        std::vector<double> y = x;
        y[static_cast<std::size_t>(q % 5)] += 1e-9;
        const double fx = m(x), fy = m(y);
        diff.push_back(fy - fx);
        n1.push_back(fx - m.clean(x));
        n2.push_back(fy - m.clean(y));
    }
    // Differences scatter at sqrt(2) sigma, not at the 1e-9 scale of the clean model change.
    EXPECT_NEAR(std::sqrt(oracle::variance(diff)), std::sqrt(2.0) * sigma, 0.05 * std::sqrt(2.0) * sigma);
    const double m1 = oracle::mean(n1), m2 = oracle::mean(n2);
    double c = 0.0;
    for (std::size_t i = 0; i < n1.size(); ++i) c += (n1[i] - m1) * (n2[i] - m2);
    c /= static_cast<double>(n1.size() - 1) * std::sqrt(oracle::variance(n1) * oracle::variance(n2));
    EXPECT_LT(std::abs(c), 4.0 / std::sqrt(static_cast<double>(n1.size())));
}

TEST(Synthetic, SmoothModelRange) {
    const auto m = SyntheticModel::smooth();
    EXPECT_EQ(m.kind(), SyntheticKind::smooth_nonpolynomial);
    EXPECT_EQ(m.dim(), 5u);
    const auto d = random_design(5, 100'000, 6);
    const Vector v = evaluate_synthetic(m, d.nodes);
    EXPECT_GE(v.minCoeff(), 233.9975 - 1e-4);
    EXPECT_LE(v.maxCoeff(), 442.6851 + 1e-4);
    EXPECT_NEAR(SyntheticModel::smooth_range, 442.6851 - 233.9975, 1e-9);
    EXPECT_NEAR(v.mean(), 325.0, 5.0);
    EXPECT_EQ(code_of([&] { (void)m.clean(std::vector<double>{0.0}); }), ErrorCode::shape);
    EXPECT_EQ(code_of([] { (void)SyntheticModel::smooth(-1.0); }), ErrorCode::invalid_argument);
}

TEST(OutputParserTest, KeyColumnAndLastLine) {
    const auto dir = oracle::fresh_dir("parser");
    std::ofstream(dir / "out.txt") << "header line\nrmse: 1.5\nE = 42.25\n\n1 2 3.5\n  \n";
    OutputParser p;
    p.file = "out.txt";
    p.key = "E";
    EXPECT_EQ(p.parse(dir / "out.txt"), 42.25);
    p.key = "rmse";
    EXPECT_EQ(p.parse(dir / "out.txt"), 1.5);
    p.key = "missing";
    EXPECT_FALSE(p.parse(dir / "out.txt"));
    p.key.clear();
    EXPECT_EQ(p.parse(dir / "out.txt"), 1.0);
    p.column = 2;
    EXPECT_EQ(p.parse(dir / "out.txt"), 3.5);
    p.column = 3;
    EXPECT_FALSE(p.parse(dir / "out.txt"));
    EXPECT_FALSE(p.parse(dir / "absent.txt"));
    std::ofstream(dir / "nan.txt") << "E = nan\n";
    p.key = "E";
    EXPECT_FALSE(p.parse(dir / "nan.txt"));
}

TEST(RunEnsemble, RenderInput) {
    const auto space = physical_box();
    ExternalModelSpec spec;
    const std::vector<double> p{0.5, 2.25};
    EXPECT_EQ(render_input(spec, space, p), "a = 0.5\nb = 2.25\n");
    spec.input_template = "&PARM a={a}, b={b}, again={a} {c}\n";
    EXPECT_EQ(render_input(spec, space, p), "&PARM a=0.5, b=2.25, again=0.5 {c}\n");
    EXPECT_EQ(node_directory_name(7), "node_000007");
}

TEST(RunEnsemble, MockModelMatchesSynthetic) {
    const auto dir = oracle::fresh_dir("mock");
    const auto space = physical_box();
    const auto design = small_design(40, 12);
    ExternalModelSpec spec;
    spec.work_dir = dir;
    spec.command = mock_command;
    spec.output.key = "E";
    const auto res = run_ensemble(spec, design, space);
    ASSERT_TRUE(res.complete());
    ASSERT_TRUE(res.ensemble);
    EXPECT_TRUE(res.failures.empty());
    const Vector ref = evaluate_synthetic(SyntheticModel::planted(quadratic_truth()), design.nodes);
    EXPECT_EQ(res.ensemble->nodes(), design.nodes);
    for (Eigen::Index q = 0; q < ref.size(); ++q) EXPECT_NEAR(res.ensemble->values()[q], ref[q], 1e-12);
    EXPECT_EQ(res.ensemble->tags()[3], "run:node_000003");
    EXPECT_EQ(res.completed.size(), 40u);
}

TEST(RunEnsemble, InputFilesRoundTripToDesign) {
    const auto dir = oracle::fresh_dir("units");
    const auto space = physical_box();
    const auto design = small_design(30, 2);
    ExternalModelSpec spec;
    spec.work_dir = dir;
    (void)run_ensemble(spec, design, space);
    for (std::size_t q = 0; q < design.size(); ++q) {
        std::istringstream in(slurp(dir / node_directory_name(q) / "input.txt"));
        std::vector<double> p;
        std::string name, eq;
        double v = 0.0;
        while (in >> name >> eq >> v) p.push_back(v);
        ASSERT_EQ(p.size(), 2u);
        const auto xi = space.to_canonical(p);
        for (std::size_t i = 0; i < 2; ++i)
            EXPECT_NEAR(xi[i], design.nodes(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(i)), 1e-12);
    }
}

TEST(RunEnsemble, ResumeIsIdempotent) {
    const auto space = physical_box();
    const auto design = small_design(20, 8);
    const auto dir = oracle::fresh_dir("resume");
    ExternalModelSpec spec;
    spec.work_dir = dir;
    spec.output.key = "E";
    // Every invocation is logged so reruns can be counted.
    spec.command = "echo x >> " + (dir / "calls.log").string() + " && " + mock_command;

    // Interrupted: a failing model for half the nodes.
    ExternalModelSpec broken = spec;
    broken.command = "[ $(basename $PWD | tail -c 2) -lt 5 ] && " + spec.command;
    const auto first = run_ensemble(broken, design, space);
    EXPECT_FALSE(first.complete());
    EXPECT_EQ(first.completed.size() + first.pending.size(), 20u);
    EXPECT_EQ(first.failures.size(), first.pending.size());
    ASSERT_TRUE(first.ensemble);
    EXPECT_FALSE(first.ensemble->weights());
    const std::size_t done_first = first.completed.size();
    // Rows follow design order.
    for (std::size_t r = 0; r < done_first; ++r)
        EXPECT_EQ(first.ensemble->nodes().row(static_cast<Eigen::Index>(r)),
                  design.nodes.row(static_cast<Eigen::Index>(first.completed[r])));

    const auto resumed = run_ensemble(spec, design, space);
    ASSERT_TRUE(resumed.complete());
    std::ifstream log(dir / "calls.log");
    const auto calls = std::count(std::istreambuf_iterator<char>(log), {}, '\n');
    EXPECT_EQ(static_cast<std::size_t>(calls), 20u);

    const auto fresh = oracle::fresh_dir("resume_ref");
    ExternalModelSpec clean = spec;
    clean.work_dir = fresh;
    clean.command = mock_command;
    const auto ref = run_ensemble(clean, design, space);
    EXPECT_EQ(resumed.ensemble->nodes(), ref.ensemble->nodes());
    EXPECT_EQ(resumed.ensemble->values(), ref.ensemble->values());

    // A third pass runs nothing and returns the same ensemble.
    const auto again = run_ensemble(spec, design, space);
    std::ifstream log2(dir / "calls.log");
    EXPECT_EQ(std::count(std::istreambuf_iterator<char>(log2), {}, '\n'), 20);
    EXPECT_EQ(again.ensemble->values(), resumed.ensemble->values());
}

TEST(RunEnsemble, ManifestForLevelFiveGrid) {
    const auto dir = oracle::fresh_dir("manifest");
    std::vector<ParameterSpec> params;
    for (int i = 0; i < 5; ++i) params.push_back({"p" + std::to_string(i), 0.0, 1.0, std::nullopt});
    const ParameterSpace space(params);
    const auto design = smolyak_design(build_smolyak(5, 5));
    ExternalModelSpec spec;
    spec.work_dir = dir;
    spec.command = "";
    const auto res = run_ensemble(spec, design, space);
    EXPECT_FALSE(res.ensemble);
    EXPECT_EQ(res.pending.size(), 903u);
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory()) names.insert(e.path().filename().string());
    EXPECT_EQ(names.size(), 903u);
    EXPECT_TRUE(names.count("node_000000") && names.count("node_000902"));
    std::ifstream in(res.manifest);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++rows;
    EXPECT_EQ(rows, 903u);

    // Outputs dropped in offline are harvested without a command and keep quadrature weights.
    const Vector v = evaluate_synthetic(SyntheticModel::smooth(), design.nodes);
    for (std::size_t q = 0; q < 903; ++q)
        std::ofstream(dir / node_directory_name(q) / "output.txt") << io::format_real(v[static_cast<Eigen::Index>(q)]) << "\n";
    const auto harvested = run_ensemble(spec, design, space);
    ASSERT_TRUE(harvested.complete());
    EXPECT_EQ(harvested.ensemble->values(), v);
    ASSERT_TRUE(harvested.ensemble->weights());
    EXPECT_EQ(*harvested.ensemble->weights(), *design.weights);
}

TEST(RunEnsemble, FailuresAndEmptyHarvest) {
    const auto space = physical_box();
    const auto design = small_design(5, 1);
    ExternalModelSpec spec;
    spec.work_dir = oracle::fresh_dir("fail");
    spec.command = "exit 3";
    EXPECT_EQ(code_of([&] { (void)run_ensemble(spec, design, space); }), ErrorCode::numerical);
    spec.command = "echo garbage > output.txt";
    spec.work_dir = oracle::fresh_dir("fail2");
    EXPECT_EQ(code_of([&] { (void)run_ensemble(spec, design, space); }), ErrorCode::numerical);
    spec.command = "sleep 5; echo 1 > output.txt";
    spec.timeout = std::chrono::seconds(1);
    spec.work_dir = oracle::fresh_dir("fail3");
    const auto t0 = std::chrono::steady_clock::now();
    EXPECT_EQ(code_of([&] { (void)run_ensemble(spec, small_design(2, 1), space); }), ErrorCode::numerical);
    EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(4));
    EXPECT_EQ(code_of([&] { (void)run_ensemble(spec, random_design(3, 4, 1), space); }), ErrorCode::shape);
}

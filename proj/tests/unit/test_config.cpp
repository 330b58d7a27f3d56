#include "config.hpp"

#include <gtest/gtest.h>

using namespace pcecal_cli;

namespace {

const char* full_config = R"([parameters]
Ri_c 0.1 1.0 0.3   # critical Richardson number
nu0 1e-3 1e-1
[design]
level = 5
seed = 3
[fit]
method = bpdn
order = 5
folds = 4
delta_grid = 1e-4 1e-3 0.01
opt_tol = 1e-5
[calibration]
iterations = 20000
burn_in = 2000
proposal_scales = 0.1 0.2
fixed_scale = 1.5
seed = 9
[model]
command = ./run_model.sh --fast # not a comment here
input_template = Ri_c={Ri_c} nu0={nu0}
output_key = E
timeout = 30
[paths]
work_dir = runs
output_dir = out
)";

std::string error_of(const std::string& text) {
    try {
        (void)parse_config(text, "proj.cfg");
    } catch (const ConfigError& e) {
        return e.what();
    }
    ADD_FAILURE() << "no ConfigError for:\n" << text;
    return {};
}

}  // namespace

TEST(Config, ParsesEveryBlock) {
    const auto c = parse_config(full_config, "proj.cfg");
    ASSERT_EQ(c.parameters.size(), 2u);
    EXPECT_EQ(c.parameters[0].name, "Ri_c");
    EXPECT_EQ(c.parameters[0].nominal, 0.3);
    EXPECT_FALSE(c.parameters[1].nominal);
    EXPECT_EQ(c.parameters[1].lower, 1e-3);
    EXPECT_EQ(c.design.level, 5);
    EXPECT_EQ(c.design.seed, 3u);
    EXPECT_EQ(c.fit.method, "bpdn");
    EXPECT_EQ(c.fit.delta_grid, (std::vector<double>{1e-4, 1e-3, 0.01}));
    EXPECT_EQ(c.fit.opt_tol, 1e-5);
    EXPECT_EQ(c.calibration.iterations, 20000u);
    EXPECT_EQ(c.calibration.burn_in, 2000u);
    EXPECT_EQ(c.calibration.fixed_scale, 1.5);
    EXPECT_EQ(c.calibration.ke, 17.0);
    EXPECT_EQ(c.calibration.alpha, 18.18);
    EXPECT_EQ(c.calibration.beta, 72.02);
    EXPECT_EQ(c.model.command, "./run_model.sh --fast # not a comment here");
    EXPECT_EQ(c.model.input_template, "Ri_c={Ri_c} nu0={nu0}");
    EXPECT_EQ(c.model.timeout, 30.0);
    EXPECT_EQ(c.paths.output_dir, "out");
}

TEST(Config, RenderRoundTrips) {
    const auto c = parse_config(full_config, "proj.cfg");
    const auto text = render_config(c);
    const auto back = parse_config(text, "rendered");
    EXPECT_EQ(render_config(back), text);
    EXPECT_EQ(back.model.command, c.model.command);
    EXPECT_EQ(back.fit.delta_grid, c.fit.delta_grid);
    EXPECT_EQ(render_config(parse_config("", "empty")), render_config(Config{}));
}

TEST(Config, StrictnessWithLineNumbers) {
    EXPECT_NE(error_of("[fit]\norder = 3\nordr = 4\n").find("proj.cfg:3"), std::string::npos);
    EXPECT_NE(error_of("[fit]\norder = 3\nordr = 4\n").find("unknown key 'ordr'"), std::string::npos);
    EXPECT_NE(error_of("[fitting]\n").find("proj.cfg:1: unknown section"), std::string::npos);
    EXPECT_NE(error_of("[fit]\norder = 3\norder = 4\n").find("proj.cfg:3: duplicate key"), std::string::npos);
    EXPECT_NE(error_of("[fit]\n[design]\n[fit]\n").find("proj.cfg:3: duplicate section"), std::string::npos);
    EXPECT_NE(error_of("order = 3\n").find("outside of any section"), std::string::npos);
    EXPECT_NE(error_of("[fit]\norder = three\n").find("proj.cfg:2"), std::string::npos);
    EXPECT_NE(error_of("[fit]\nopt_tol = 1e-4x\n").find("not a finite number"), std::string::npos);
    EXPECT_NE(error_of("[fit]\nmethod = lasso\n").find("nisp or bpdn"), std::string::npos);
    EXPECT_NE(error_of("[fit]\ndelta = -1\n").find("nonnegative"), std::string::npos);
    EXPECT_NE(error_of("[fit]\norder\n").find("key = value"), std::string::npos);
    EXPECT_NE(error_of("[fit]\norder =\n").find("has no value"), std::string::npos);
    EXPECT_NE(error_of("[parameters]\na 1 0\n").find("lower bound"), std::string::npos);
    EXPECT_NE(error_of("[parameters]\na 0 1 2\n").find("outside its bounds"), std::string::npos);
    EXPECT_NE(error_of("[parameters]\na 0 1\na 0 2\n").find("proj.cfg:3: duplicate parameter"), std::string::npos);
    EXPECT_NE(error_of("[parameters]\na 0\n").find("name lower upper"), std::string::npos);
    EXPECT_NE(error_of("[design]\nlevel = 2\nrandom = 10\n").find("either level or random"), std::string::npos);
    EXPECT_NE(error_of("[calibration]\nproposal_scales = \n").find("has no value"), std::string::npos);
    EXPECT_NE(error_of("[fit\n").find("malformed section"), std::string::npos);
}

TEST(Config, MissingFile) {
    EXPECT_THROW((void)load_config("/nonexistent/proj.cfg"), ConfigError);
}

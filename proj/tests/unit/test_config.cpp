#include <gtest/gtest.h>

#include "acore/config.hpp"
#include "acore/error.hpp"
#include "acore/models.hpp"

using namespace acore;

TEST(KeyValueConfig, SectionsAndComments) {
    const auto cfg = KeyValueConfig::parse("seed = 4\n# note\n[model]\nname = gmm ; trailing\nlower = 1.5\n");
    EXPECT_EQ(cfg.get_u64("seed"), 4u);
    EXPECT_EQ(cfg.get_string("model.name"), "gmm");
    EXPECT_DOUBLE_EQ(cfg.get_double("model.lower"), 1.5);
    EXPECT_DOUBLE_EQ(cfg.get_double("model.upper", 9.0), 9.0);
}

TEST(KeyValueConfig, ErrorsCarryLineNumbers) {
    const auto cfg = KeyValueConfig::parse("[a]\nx = 1\ny = abc\n");
    try {
        cfg.get_double("a.y");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    try {
        KeyValueConfig::parse("[a]\nx = 1\nx = 2\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(KeyValueConfig, Lists) {
    const auto cfg = KeyValueConfig::parse("b = 100, 500,1000\nv = 0.5, -2\n");
    EXPECT_EQ(cfg.get_counts("b"), (std::vector<std::uint64_t>{100, 500, 1000}));
    EXPECT_EQ(cfg.get_doubles("v"), (std::vector<double>{0.5, -2.0}));
}

TEST(KeyValueConfig, UnknownKeysRejected) {
    const auto cfg = KeyValueConfig::parse("[model]\nname = gmm\nnmae = x\n");
    try {
        cfg.require_known({"model.name"});
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(ModelConfig, SeedIsMandatory) {
    EXPECT_THROW(load_model_config(KeyValueConfig::parse("[model]\nname = gmm\n")), ConfigError);
    const auto mc = load_model_config(KeyValueConfig::parse("[model]\nname = gmm\nseed = 12\n"));
    EXPECT_EQ(mc.seed, 12u);
    EXPECT_EQ(mc.model.kind, ModelKind::gmm);
}

TEST(ModelConfig, BadValuesReportTheirLine) {
    try {
        load_model_config(KeyValueConfig::parse("seed = 1\n[model]\nname = poisson_counting\nn_obs = 0\n"));
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 4u);
    }
    try {
        load_model_config(KeyValueConfig::parse("seed = 1\n[model]\nname = nonsense\n"));
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(Fnv1a, KnownVector) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

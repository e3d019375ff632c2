// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "risgee/config_io.hpp"

namespace risgee {
namespace {

using namespace risgee::config_io;

TEST(ConfigIo, DefaultsConvertToSi) {
  const auto cfg = to_config(default_document());
  EXPECT_EQ(cfg.users, 4);
  EXPECT_EQ(cfg.bs_antennas, 4);
  EXPECT_EQ(cfg.ris_elements, 100);
  EXPECT_DOUBLE_EQ(cfg.bandwidth_hz, 20e6);
  EXPECT_DOUBLE_EQ(cfg.p0_w, 10.0);       // 40 dBm
  EXPECT_DOUBLE_EQ(cfg.p0_ris_w, 1.0);    // 30 dBm
  EXPECT_DOUBLE_EQ(cfg.pcn_w, 1e-3);      // 0 dBm
  EXPECT_DOUBLE_EQ(cfg.pr_max_w, 10.0);   // 10 dBW
  EXPECT_DOUBLE_EQ(cfg.passive_pcn_w, 1e-3);
  EXPECT_DOUBLE_EQ(cfg.passive_p0_ris_w, 0.1);  // 20 dBm
  EXPECT_DOUBLE_EQ(cfg.pathloss_exponent, 4.0);
  EXPECT_DOUBLE_EQ(cfg.rice_k_ris_bs, 4.0);
  EXPECT_DOUBLE_EQ(cfg.rice_k_user_ris, 2.0);
  EXPECT_DOUBLE_EQ(cfg.geometry.area_radius_m, 100.0);
  EXPECT_DOUBLE_EQ(cfg.geometry.bs_distance_m, 50.0);
  EXPECT_NEAR(cfg.sigma2_w, std::pow(10.0, -16.4) * 2e4, 1e-25);
  EXPECT_EQ(cfg.p_max_w.size(), 4);
  EXPECT_DOUBLE_EQ(cfg.p_max_w(0), 1.0);
  EXPECT_DOUBLE_EQ(cfg.mu(3), 1.0);
}

TEST(ConfigIo, FieldNamesAreSortedAndCarryUnits) {
  const auto names = field_names();
  EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
  EXPECT_NE(std::find(names.begin(), names.end(), "p0_dbm"), names.end());
  EXPECT_NE(std::find(names.begin(), names.end(), "pr_max_dbw"), names.end());
  EXPECT_NE(std::find(names.begin(), names.end(), "bandwidth_mhz"), names.end());
}

TEST(ConfigIo, MergeOverlaysKnownFields) {
  const auto doc = merge(default_document(), {{"users", 2}, {"p_max_dbw", -10.0}});
  EXPECT_EQ(doc.at("users"), 2);
  const auto cfg = to_config(doc);
  EXPECT_DOUBLE_EQ(cfg.p_max_w(1), 0.1);
}

TEST(ConfigIo, RejectsUnknownAndMistypedFields) {
  EXPECT_THROW(merge(default_document(), {{"users_count", 2}}), ConfigError);
  EXPECT_THROW(merge(default_document(), {{"users", 2.5}}), ConfigError);
  EXPECT_THROW(merge(default_document(), {{"users", -1}}), ConfigError);
  EXPECT_THROW(merge(default_document(), {{"bandwidth_mhz", "20"}}), ConfigError);
  EXPECT_THROW(merge(default_document(), nlohmann::json::array()), ConfigError);
  EXPECT_THROW(to_config({{"ris_elements", 0}}), ConfigError);
  EXPECT_THROW(to_config({{"bandwidth_mhz", 0.0}}), ConfigError);
  EXPECT_THROW(to_config({{"mu", 0.5}}), ConfigError);
}

TEST(ConfigIo, EnvironmentOverridesEveryField) {
  const auto base = default_document();
  for (const auto& name : field_names()) {
    std::string upper = name;
    std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
    const std::string var = "RISGEE_" + upper;
    const auto doc = apply_env(base, [&](const std::string& v) -> std::optional<std::string> {
      if (v == var) return std::string("7");
      return std::nullopt;
    });
    EXPECT_EQ(doc.at(name), 7) << var;
  }
}

TEST(ConfigIo, EnvironmentErrors) {
  auto bad = [](const std::string& v) -> std::optional<std::string> {
    if (v == "RISGEE_USERS") return std::string("four");
    return std::nullopt;
  };
  EXPECT_THROW(apply_env(default_document(), bad), ConfigError);
  auto mistyped = [](const std::string& v) -> std::optional<std::string> {
    if (v == "RISGEE_SEED") return std::string("1.5");
    return std::nullopt;
  };
  EXPECT_THROW(apply_env(default_document(), mistyped), ConfigError);
}

TEST(ConfigIo, ReadFile) {
  const auto dir = std::filesystem::temp_directory_path() / "risgee_config_io_test";
  std::filesystem::create_directories(dir);
  const auto good = dir / "good.json";
  std::ofstream(good) << R"({"users": 2, "ris_elements": 16})";
  EXPECT_EQ(read_file(good.string()).at("ris_elements"), 16);

  const auto broken = dir / "broken.json";
  std::ofstream(broken) << "{\"users\": ";
  try {
    read_file(broken.string());
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("broken.json"), std::string::npos);
  }
  EXPECT_THROW(read_file((dir / "missing.json").string()), ConfigError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace risgee

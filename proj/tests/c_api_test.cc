// Copyright 2026 The NNMPC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Tests of the C interface, written against the public header only.

#include "nnmpc/nnmpc.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include <gmock/gmock.h>
#include <gtest/gtest.h>
#include <unistd.h>

namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("nnmpc_capi_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct ConfigDeleter {
  void operator()(nnmpc_config* c) const { nnmpc_config_free(c); }
};
using ConfigPtr = std::unique_ptr<nnmpc_config, ConfigDeleter>;

ConfigPtr tiny_config() {
  nnmpc_config* cfg = nullptr;
  EXPECT_EQ(nnmpc_config_parse(R"({"excitation": {"episodes": 8, "duration": 1.0},
                                   "training": {"epochs": 2}})",
                               &cfg),
            NNMPC_OK)
      << nnmpc_last_error();
  return ConfigPtr(cfg);
}

std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  nnmpc_string_free(s);
  return out;
}

TEST(CApiTest, VersionAndStatusNames) {
  EXPECT_GT(std::strlen(nnmpc_version()), 0u);
  EXPECT_STREQ(nnmpc_status_name(NNMPC_OK), "ok");
  EXPECT_STREQ(nnmpc_status_name(NNMPC_ERR_INTERNAL), "internal");
  EXPECT_STREQ(nnmpc_status_name(static_cast<nnmpc_status>(55)), "unknown");
}

TEST(CApiTest, ConfigErrorsCarryMessages) {
  nnmpc_config* cfg = nullptr;
  EXPECT_EQ(nnmpc_config_parse(R"({"bogus": 1})", &cfg), NNMPC_ERR_SCHEMA);
  EXPECT_EQ(cfg, nullptr);
  EXPECT_THAT(nnmpc_last_error(), HasSubstr("bogus"));
  EXPECT_EQ(nnmpc_config_load("/nonexistent/x.json", &cfg), NNMPC_ERR_IO);
  EXPECT_EQ(nnmpc_config_parse(nullptr, &cfg), NNMPC_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(nnmpc_config_default(nullptr), NNMPC_ERR_INVALID_ARGUMENT);
}

TEST(CApiTest, ConfigDumpRoundTrip) {
  nnmpc_config* cfg = nullptr;
  ASSERT_EQ(nnmpc_config_default(&cfg), NNMPC_OK);
  char* text = nullptr;
  ASSERT_EQ(nnmpc_config_dump(cfg, &text), NNMPC_OK);
  const std::string first = take(text);
  nnmpc_config* back = nullptr;
  ASSERT_EQ(nnmpc_config_parse(first.c_str(), &back), NNMPC_OK);
  ASSERT_EQ(nnmpc_config_dump(back, &text), NNMPC_OK);
  EXPECT_EQ(take(text), first);
  nnmpc_config_free(cfg);
  nnmpc_config_free(back);
  nnmpc_config_free(nullptr);
}

TEST(CApiTest, PlantStepsAndRejectsBadInput) {
  const ConfigPtr cfg = tiny_config();
  nnmpc_plant* plant = nullptr;
  const double offset[3] = {0.05, 0.0, 0.0};
  ASSERT_EQ(nnmpc_plant_create(cfg.get(), 0.5, 6.0e-5, offset, &plant), NNMPC_OK);
  double q[4] = {1.0, 1.0, 1.0, 1.0}, qd[4] = {0.0, 0.0, 0.0, 0.0};
  const double tau[4] = {0.5, -0.5, 0.2, 0.0};
  ASSERT_EQ(nnmpc_plant_step(plant, q, qd, tau, 0.0), NNMPC_OK);
  EXPECT_NE(q[0], 1.0);
  const double bad[4] = {NAN, 0.0, 0.0, 0.0};
  EXPECT_EQ(nnmpc_plant_step(plant, q, qd, bad, 0.0), NNMPC_ERR_INPUT_DOMAIN);
  nnmpc_plant_free(plant);
  EXPECT_EQ(nnmpc_plant_create(cfg.get(), 3.0, 0.0, nullptr, &plant), NNMPC_ERR_CAPACITY_EXCEEDED);
}

TEST(CApiTest, PipelineAndController) {
  const ConfigPtr cfg = tiny_config();
  const fs::path dir = fresh_dir("pipeline");
  char* summary = nullptr;
  ASSERT_EQ(nnmpc_collect(cfg.get(), 3, (dir / "data").c_str(), &summary), NNMPC_OK)
      << nnmpc_last_error();
  EXPECT_THAT(take(summary), HasSubstr("rows="));
  ASSERT_EQ(nnmpc_train(cfg.get(), (dir / "data" / "data.csv").c_str(), (dir / "model").c_str(),
                        nullptr),
            NNMPC_OK)
      << nnmpc_last_error();
  const std::string model_path = (dir / "model" / "model.json").string();

  nnmpc_model* model = nullptr;
  ASSERT_EQ(nnmpc_model_load(model_path.c_str(), &model), NNMPC_OK);
  const double q[4] = {1.0, 1.0, 1.0, 1.0}, qd[4] = {0, 0, 0, 0}, u[4] = {0, 0, 0, 0};
  double dq[4], dqd[4];
  ASSERT_EQ(nnmpc_model_predict(model, q, qd, u, dq, dqd), NNMPC_OK);
  EXPECT_TRUE(std::isfinite(dq[0]) && std::isfinite(dqd[3]));

  nnmpc_controller* ctl = nullptr;
  const double outside[4] = {1.0, 1.0, 9.0, 1.0};
  EXPECT_EQ(nnmpc_controller_create(cfg.get(), model, outside, &ctl), NNMPC_ERR_BOUNDS);
  const double r[4] = {1.2, 1.0, 1.0, 1.0};
  ASSERT_EQ(nnmpc_controller_create(cfg.get(), model, r, &ctl), NNMPC_OK);
  nnmpc_model_free(model);  // the controller holds its own copy
  double cmd[4];
  nnmpc_step_info info;
  ASSERT_EQ(nnmpc_controller_step(ctl, q, qd, cmd, &info), NNMPC_OK);
  EXPECT_GT(info.evaluations, 0);
  EXPECT_GT(std::strlen(info.termination), 0u);
  for (double c : cmd) EXPECT_LE(std::abs(c), 6.0);
  EXPECT_EQ(nnmpc_controller_set_reference(ctl, outside, nullptr, 0), NNMPC_ERR_BOUNDS);
  EXPECT_EQ(nnmpc_controller_set_reference(ctl, r, nullptr, 1), NNMPC_OK);
  EXPECT_EQ(nnmpc_controller_step(ctl, q, qd, cmd, nullptr), NNMPC_OK);
  nnmpc_controller_free(ctl);

  ASSERT_EQ(nnmpc_run(cfg.get(), "hold", -1, model_path.c_str(), (dir / "run").c_str(), &summary),
            NNMPC_OK)
      << nnmpc_last_error();
  EXPECT_THAT(take(summary), HasSubstr("settling_time_1="));
  EXPECT_TRUE(fs::exists(dir / "run" / "run.manifest.json"));

  ASSERT_EQ(nnmpc_metrics(cfg.get(), (dir / "run" / "trajectory.csv").c_str(), nullptr, &summary),
            NNMPC_OK);
  EXPECT_THAT(take(summary), HasSubstr("steps=100"));

  EXPECT_EQ(nnmpc_run(cfg.get(), "no-such-scenario", 1, model_path.c_str(),
                      (dir / "bad").c_str(), nullptr),
            NNMPC_ERR_INVALID_ARGUMENT);
}

TEST(CApiTest, ScenarioNames) {
  char* names = nullptr;
  ASSERT_EQ(nnmpc_scenario_names(&names), NNMPC_OK);
  const std::string text = take(names);
  EXPECT_THAT(text, HasSubstr("wrench\n"));
  EXPECT_THAT(text, HasSubstr("weights\n"));
}

}  // namespace

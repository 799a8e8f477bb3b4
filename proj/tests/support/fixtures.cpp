#include "fixtures.hpp"

#include <fstream>
#include <sstream>

#include "sufaudit/scm.hpp"

namespace fixture {

namespace {

void write(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

}  // namespace

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::path(SUFAUDIT_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path write_audit(const std::filesystem::path& dir, const std::string& preset, std::size_t n,
                                  std::uint64_t seed, const Json& roles, const Json& criteria, std::size_t reps) {
  const auto model = sufaudit::build_scenario(preset);
  const auto data = sufaudit::simulate(model, n, seed).without_latent();
  write(dir / "data.csv", sufaudit::to_csv(data));
  write(dir / (preset + ".dag"), model.graph().to_dsl());

  Json schema = Json::object();
  for (const auto& name : data.names()) schema[name] = "binary";
  Json config;
  config["spec_version"] = "1";
  config["data"] = "data.csv";
  config["schema"] = schema;
  config["roles"] = roles;
  config["graphs"] = Json::array({preset + ".dag"});
  config["bootstrap"] = {{"reps", reps}, {"seed", 7}};
  config["criteria"] = criteria;
  const auto path = dir / "config.json";
  write(path, config.dump(2));
  return path;
}

std::string read(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace fixture

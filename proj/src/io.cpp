#include "pico/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pico/error.hpp"

namespace pico::io {

using nlohmann::json;

namespace {

json tensor_values(const Tensor& t) {
  if (!t.all_finite()) throw NumericalError("serialize: non-finite tensor value");
  return json(t.data());
}

std::vector<Tensor> read_vector_list(const json& arr, int dim, const std::string& what) {
  std::vector<Tensor> out;
  out.reserve(arr.size());
  for (const auto& row : arr) {
    std::vector<double> values = row.get<std::vector<double>>();
    if (static_cast<int>(values.size()) != dim)
      throw IoError("dataset: " + what + " entry has " + std::to_string(values.size()) +
                    " values, expected " + std::to_string(dim));
    out.emplace_back(std::vector<int>{dim}, std::move(values));
  }
  return out;
}

json parse_line(const std::string& line, const std::string& what) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw IoError(what + ": malformed JSON: " + e.what());
  }
}

std::string get_line(std::istream& in, const std::string& what) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(what + ": unexpected end of input");
  return line;
}

}  // namespace

void write_dataset(const Dataset& dataset, std::ostream& out) {
  json header = {
      {"format", "pico.dataset"},
      {"version", kDatasetVersion},
      {"domain", dataset.info.domain},
      {"state_dim", dataset.info.state_dim},
      {"action_dim", dataset.info.action_dim},
      {"num_primitives", dataset.info.num_primitives},
      {"t_min", dataset.info.t_min},
      {"t_max", dataset.info.t_max},
      {"action_noise_std", dataset.info.action_noise_std},
      {"state_layout", dataset.info.state_layout},
      {"count", dataset.demos.size()},
  };
  out << header.dump() << '\n';
  for (const Demonstration& demo : dataset.demos) {
    json rec = {
        {"seed", demo.seed},
        {"sketch", demo.sketch.labels()},
        {"labels", demo.labels},
    };
    json states = json::array(), actions = json::array(), noise = json::array();
    for (const Tensor& s : demo.states) states.push_back(tensor_values(s));
    for (const Tensor& a : demo.actions) actions.push_back(tensor_values(a));
    for (const Tensor& e : demo.noise) noise.push_back(tensor_values(e));
    rec["states"] = std::move(states);
    rec["actions"] = std::move(actions);
    rec["noise"] = std::move(noise);
    out << rec.dump() << '\n';
  }
}

Dataset read_dataset(std::istream& in) {
  json header = parse_line(get_line(in, "dataset header"), "dataset header");
  if (header.value("format", "") != "pico.dataset")
    throw IoError("dataset: not a pico.dataset file");
  if (header.value("version", -1) != kDatasetVersion)
    throw IoError("dataset: unsupported version " + std::to_string(header.value("version", -1)));

  Dataset ds;
  ds.info.domain = header.at("domain").get<std::string>();
  ds.info.state_dim = header.at("state_dim").get<int>();
  ds.info.action_dim = header.at("action_dim").get<int>();
  ds.info.num_primitives = header.at("num_primitives").get<int>();
  ds.info.t_min = header.at("t_min").get<int>();
  ds.info.t_max = header.at("t_max").get<int>();
  ds.info.action_noise_std = header.at("action_noise_std").get<double>();
  ds.info.state_layout = header.at("state_layout").get<std::vector<std::string>>();
  auto count = header.at("count").get<std::size_t>();

  for (std::size_t i = 0; i < count; ++i) {
    json rec = parse_line(get_line(in, "dataset record"), "dataset record");
    Demonstration demo;
    demo.seed = rec.at("seed").get<std::uint64_t>();
    demo.sketch = TaskSketch(rec.at("sketch").get<std::vector<int>>());
    demo.labels = rec.at("labels").get<std::vector<int>>();
    demo.states = read_vector_list(rec.at("states"), ds.info.state_dim, "states");
    demo.actions = read_vector_list(rec.at("actions"), ds.info.action_dim, "actions");
    demo.noise = read_vector_list(rec.at("noise"), ds.info.action_dim, "noise");
    if (demo.states.size() != demo.actions.size() || demo.states.size() != demo.labels.size() ||
        demo.states.size() != demo.noise.size())
      throw IoError("dataset: record " + std::to_string(i) + " has misaligned sequences");
    ds.demos.push_back(std::move(demo));
  }
  return ds;
}

void write_dataset_file(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_dataset(dataset, out);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Dataset read_dataset_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_dataset(in);
}

void write_checkpoint(const PicoNetwork& net, std::ostream& out) {
  const ModelConfig& cfg = net.config();
  json prims = json::array();
  for (const PrimitiveMeta& meta : net.primitives())
    prims.push_back({{"id", meta.id}, {"origin", origin_name(meta.origin)}});
  json header = {
      {"format", "pico.checkpoint"},
      {"version", kCheckpointVersion},
      {"state_dim", cfg.state_dim},
      {"action_dim", cfg.action_dim},
      {"encoder_dim", cfg.encoder_dim},
      {"hidden_dim", cfg.hidden_dim},
      {"primitive_hidden", cfg.primitive_hidden},
      {"primitives", std::move(prims)},
  };
  out << header.dump() << '\n';
  for (const std::string& name : net.params().names()) {
    const Tensor& t = net.params().at(name);
    json block = {{"name", name}, {"shape", t.shape()}, {"data", tensor_values(t)}};
    out << block.dump() << '\n';
  }
}

PicoNetwork read_checkpoint(std::istream& in) {
  json header = parse_line(get_line(in, "checkpoint header"), "checkpoint header");
  if (header.value("format", "") != "pico.checkpoint")
    throw IoError("checkpoint: not a pico.checkpoint file");
  if (header.value("version", -1) != kCheckpointVersion)
    throw IoError("checkpoint: unsupported version " +
                  std::to_string(header.value("version", -1)));

  ModelConfig cfg;
  cfg.state_dim = header.at("state_dim").get<int>();
  cfg.action_dim = header.at("action_dim").get<int>();
  cfg.encoder_dim = header.at("encoder_dim").get<int>();
  cfg.hidden_dim = header.at("hidden_dim").get<int>();
  cfg.primitive_hidden = header.at("primitive_hidden").get<std::vector<int>>();
  std::vector<PrimitiveMeta> prims;
  for (const auto& p : header.at("primitives"))
    prims.push_back({p.at("id").get<std::string>(),
                     origin_from_name(p.at("origin").get<std::string>())});

  ParameterSet params;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json block = parse_line(line, "checkpoint block");
    auto shape = block.at("shape").get<std::vector<int>>();
    auto data = block.at("data").get<std::vector<double>>();
    try {
      params.insert(block.at("name").get<std::string>(), Tensor(shape, std::move(data)));
    } catch (const Error& e) {
      throw IoError(std::string("checkpoint: ") + e.what());
    }
  }
  try {
    return PicoNetwork::from_parts(std::move(cfg), std::move(prims), std::move(params));
  } catch (const Error& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  }
}

void write_checkpoint_file(const PicoNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_checkpoint(net, out);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

PicoNetwork read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_checkpoint(in);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_csv(const std::vector<std::vector<std::string>>& rows,
               const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace pico::io

#include "hopgraph/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace hopgraph {
namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

template <typename T>
T parse_number(const std::string& s, const fs::path& path, int line) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void write_events_csv(const fs::path& path, const EventLog& log) {
  std::string out = "day,user_id,item_id\n";
  for (const auto& e : log.events) {
    out += std::to_string(e.day) + "," + std::to_string(e.user) + "," + std::to_string(e.item) + "\n";
  }
  write_file_atomic(path, out);
}

EventLog read_events_csv(const fs::path& path, int n_users, int n_items) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || split_fields(line, ',') != std::vector<std::string>{"day", "user_id", "item_id"}) {
    throw std::runtime_error(path.string() + ":1: expected header day,user_id,item_id");
  }
  EventLog log;
  log.n_users = n_users;
  log.n_items = n_items;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_fields(line, ',');
    if (f.size() != 3) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected 3 fields");
    log.events.push_back({parse_number<int>(f[0], path, lineno), parse_number<int>(f[1], path, lineno),
                          parse_number<int>(f[2], path, lineno)});
  }
  log.normalize();
  return log;
}

void write_attributes_csv(const fs::path& path, const AttributeTable& table) {
  std::string out = "node_kind,node_id,attr_name,value\n";
  auto emit = [&](const char* kind, const NodeAttributes& attrs) {
    for (int n = 0; n < attrs.n_nodes; ++n) {
      for (const auto& a : attrs.attributes) {
        out += kind;
        out += "," + std::to_string(n) + "," + a.name + ",";
        const auto row = a.values.row(n);
        // A one-hot attribute whose row is all zero is written as missing.
        if (!row.isZero(0.0)) {
          for (Eigen::Index j = 0; j < row.size(); ++j) {
            if (j > 0) out += ' ';
            out += format_double(row[j]);
          }
        }
        out += '\n';
      }
    }
  };
  emit("user", table.users);
  emit("item", table.items);
  write_file_atomic(path, out);
}

AttributeTable read_attributes_csv(const fs::path& path, int n_users, int n_items) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      split_fields(line, ',') != std::vector<std::string>{"node_kind", "node_id", "attr_name", "value"}) {
    throw std::runtime_error(path.string() + ":1: expected header node_kind,node_id,attr_name,value");
  }
  struct Pending {
    std::vector<std::string> order;
    std::map<std::string, std::map<int, std::vector<double>>> values;
    std::map<std::string, Eigen::Index> dims;
  };
  Pending users, items;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_fields(line, ',');
    if (f.size() != 4) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected 4 fields");
    Pending* p = f[0] == "user" ? &users : f[0] == "item" ? &items : nullptr;
    if (!p) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": unknown node_kind '" + f[0] + "'");
    const int id = parse_number<int>(f[1], path, lineno);
    const int limit = p == &users ? n_users : n_items;
    if (id < 0 || id >= limit) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": node id out of range");
    const std::string& name = f[2];
    if (!p->values.count(name)) p->order.push_back(name);
    std::vector<double> vec;
    for (const auto& tok : split_fields(f[3], ' ')) {
      if (!tok.empty()) vec.push_back(parse_number<double>(tok, path, lineno));
    }
    if (!vec.empty()) {
      auto [it, inserted] = p->dims.emplace(name, static_cast<Eigen::Index>(vec.size()));
      if (!inserted && it->second != static_cast<Eigen::Index>(vec.size())) {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": attribute '" + name + "' changes width");
      }
    }
    p->values[name][id] = std::move(vec);
  }
  auto build = [&](Pending& p, int n) {
    NodeAttributes attrs;
    attrs.n_nodes = n;
    for (const auto& name : p.order) {
      auto dim = p.dims.find(name);
      if (dim == p.dims.end()) throw std::runtime_error(path.string() + ": attribute '" + name + "' is missing everywhere");
      Attribute a{name, DenseMatrix::Zero(n, dim->second)};
      for (const auto& [id, vec] : p.values[name]) {
        for (std::size_t j = 0; j < vec.size(); ++j) a.values(id, static_cast<Eigen::Index>(j)) = vec[j];
      }
      attrs.attributes.push_back(std::move(a));
    }
    return attrs;
  };
  return {build(users, n_users), build(items, n_items)};
}

void save_dataset(const fs::path& dir, const Dataset& ds, const std::string& synth_config_json) {
  fs::create_directories(dir);
  write_events_csv(dir / "events.csv", ds.log);
  write_attributes_csv(dir / "attributes.csv", ds.attributes);
  auto range = [](const DayRange& r) { return json::array({r.begin, r.end}); };
  json meta = {{"format", "hopgraph.dataset"},
               {"version", 1},
               {"n_users", ds.log.n_users},
               {"n_items", ds.log.n_items},
               {"split", {{"train", range(ds.split.train)}, {"valid", range(ds.split.valid)}, {"test", range(ds.split.test)}}}};
  write_file_atomic(dir / "dataset.json", meta.dump(2) + "\n");
  if (!synth_config_json.empty()) write_file_atomic(dir / "synth_config.json", synth_config_json);
}

Dataset load_dataset(const fs::path& dir) {
  const json meta = json::parse(read_file(dir / "dataset.json"));
  Dataset ds;
  const int n_users = meta.at("n_users").get<int>();
  const int n_items = meta.at("n_items").get<int>();
  auto range = [](const json& j) { return DayRange{j.at(0).get<int>(), j.at(1).get<int>()}; };
  ds.split.train = range(meta.at("split").at("train"));
  ds.split.valid = range(meta.at("split").at("valid"));
  ds.split.test = range(meta.at("split").at("test"));
  ds.split.validate();
  ds.log = read_events_csv(dir / "events.csv", n_users, n_items);
  ds.attributes = read_attributes_csv(dir / "attributes.csv", n_users, n_items);
  ds.attributes.users.validate();
  ds.attributes.items.validate();
  return ds;
}

}  // namespace hopgraph

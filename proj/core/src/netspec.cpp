#include "bitcurve/netspec.hpp"

#include <fstream>
#include <sstream>

#include "bitcurve/errors.hpp"

namespace bitcurve::net {

namespace {

constexpr int kFormatMajor = 1;

[[noreturn]] void fail(const std::string& origin, int line, const std::string& message) {
  throw ParseError(origin + ":" + std::to_string(line) + ": " + message);
}

}  // namespace

int NetworkSpec::conv_count() const {
  int count = 0;
  for (const auto& layer : layers) {
    if (layer.kind == LayerKind::kConv) ++count;
  }
  return count;
}

std::vector<std::int64_t> NetworkSpec::conv_param_counts() const {
  std::vector<std::int64_t> counts;
  for (const auto& layer : layers) {
    if (layer.kind == LayerKind::kConv) counts.push_back(layer.param_count);
  }
  return counts;
}

std::int64_t NetworkSpec::total_params() const {
  std::int64_t total = 0;
  for (const auto& layer : layers) total += layer.param_count;
  return total;
}

void NetworkSpec::validate() const {
  if (conv_count() < 1) throw ParseError("network spec has no CONV layer");
  for (const auto& layer : layers) {
    if (layer.param_count <= 0) {
      throw ParseError("layer " + layer.name + " has non-positive param count");
    }
  }
}

NetworkSpec parse_netspec(std::istream& in, const std::string& origin) {
  NetworkSpec spec;
  std::string line;
  int line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream tokens(line);
    std::string word;
    tokens >> word;
    if (!saw_header) {
      // First meaningful line must be the versioned header "# qnetspec vN".
      std::string tag, version;
      if (word != "#" || !(tokens >> tag >> version) || tag != "qnetspec" ||
          version.size() < 2 || version[0] != 'v') {
        fail(origin, line_no, "expected '# qnetspec v1' header");
      }
      int major = 0;
      try {
        major = std::stoi(version.substr(1));
      } catch (const std::exception&) {
        fail(origin, line_no, "bad version in header: " + version);
      }
      if (major > kFormatMajor) {
        fail(origin, line_no, "unsupported qnetspec major version " + version);
      }
      saw_header = true;
      continue;
    }
    if (word == "#") continue;
    if (word == "dataset") {
      tokens >> spec.dataset;
      continue;
    }
    if (word == "layer") {
      Layer layer;
      std::string kind;
      if (!(tokens >> layer.name >> kind >> layer.param_count)) {
        fail(origin, line_no, "expected 'layer <name> <CONV|FC> <params>'");
      }
      if (kind == "CONV") {
        layer.kind = LayerKind::kConv;
      } else if (kind == "FC") {
        layer.kind = LayerKind::kFc;
      } else {
        fail(origin, line_no, "unknown layer kind: " + kind);
      }
      if (layer.param_count <= 0) {
        fail(origin, line_no, "param count must be positive");
      }
      spec.layers.push_back(std::move(layer));
      continue;
    }
    fail(origin, line_no, "unknown directive: " + word);
  }
  if (!saw_header) throw ParseError(origin + ": missing qnetspec header");
  spec.validate();
  return spec;
}

NetworkSpec load_netspec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network spec: " + path);
  return parse_netspec(in, path);
}

void write_netspec(std::ostream& out, const NetworkSpec& spec) {
  out << "# qnetspec v1\n";
  if (!spec.dataset.empty()) out << "dataset " << spec.dataset << "\n";
  for (const auto& layer : spec.layers) {
    out << "layer " << layer.name << ' '
        << (layer.kind == LayerKind::kConv ? "CONV" : "FC") << ' ' << layer.param_count
        << "\n";
  }
}

}  // namespace bitcurve::net

#include "bitcurve/history.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "bitcurve/errors.hpp"
#include "json.hpp"

namespace bitcurve::io {

namespace {

constexpr int kHistoryMajor = 1;

nlohmann::json to_json(const search::HistoryEvent& event) {
  nlohmann::json obj;
  obj["step"] = event.step;
  obj["phase"] = event.phase;
  obj["x"] = event.x;
  obj["task"] = event.task;
  obj["epochs"] = event.epochs;
  obj["y"] = event.y ? nlohmann::json(*event.y) : nlohmann::json(nullptr);
  obj["cost"] = event.cost;
  obj["cumulative_cost"] = event.cumulative_cost;
  obj["gain"] = event.gain ? nlohmann::json(*event.gain) : nlohmann::json(nullptr);
  obj["score"] = event.score ? nlohmann::json(*event.score) : nlohmann::json(nullptr);
  obj["status"] = event.status;
  if (event.cost_seconds) obj["cost_seconds"] = *event.cost_seconds;
  return obj;
}

search::HistoryEvent from_json(const nlohmann::json& obj) {
  search::HistoryEvent event;
  event.step = obj.at("step").get<int>();
  event.phase = obj.at("phase").get<std::string>();
  event.x = obj.at("x").get<std::vector<double>>();
  event.task = obj.at("task").get<int>();
  event.epochs = obj.at("epochs").get<int>();
  if (!obj.at("y").is_null()) event.y = obj.at("y").get<double>();
  event.cost = obj.at("cost").get<double>();
  event.cumulative_cost = obj.at("cumulative_cost").get<double>();
  if (!obj.at("gain").is_null()) event.gain = obj.at("gain").get<double>();
  if (!obj.at("score").is_null()) event.score = obj.at("score").get<double>();
  event.status = obj.at("status").get<std::string>();
  if (obj.contains("cost_seconds") && !obj["cost_seconds"].is_null()) {
    event.cost_seconds = obj["cost_seconds"].get<double>();
  }
  return event;
}

}  // namespace

void write_history_header(std::ostream& out) {
  out << R"({"schema":"bitcurve/history","version":1})" << "\n";
}

std::string history_line(const search::HistoryEvent& event) { return to_json(event).dump(); }

void append_history_event(std::ostream& out, const search::HistoryEvent& event) {
  out << history_line(event) << "\n";
}

std::vector<search::HistoryEvent> read_history(std::istream& in, const std::string& origin) {
  std::vector<search::HistoryEvent> events;
  std::string line;
  int line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!saw_header) {
      if (!obj.contains("schema") || obj["schema"] != "bitcurve/history") {
        throw ParseError(origin + ": missing bitcurve/history header");
      }
      const int major = obj.value("version", 0);
      if (major > kHistoryMajor) {
        throw ParseError(origin + ": unsupported history version " + std::to_string(major));
      }
      saw_header = true;
      continue;
    }
    try {
      events.push_back(from_json(obj));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!saw_header) throw ParseError(origin + ": empty history");
  return events;
}

std::vector<search::HistoryEvent> load_history(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open history: " + path);
  return read_history(in, path);
}

}  // namespace bitcurve::io

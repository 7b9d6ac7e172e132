#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bitcurve/search.hpp"

namespace bitcurve::io {

// Append-only JSONL event log. First line is a schema header; each
// subsequent line is one evaluation. Serialization is byte-deterministic
// for identical runs.
void write_history_header(std::ostream& out);
std::string history_line(const search::HistoryEvent& event);
void append_history_event(std::ostream& out, const search::HistoryEvent& event);

std::vector<search::HistoryEvent> read_history(std::istream& in, const std::string& origin);
std::vector<search::HistoryEvent> load_history(const std::string& path);

}  // namespace bitcurve::io

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "qneq/experiment.hpp"

namespace qneq::cli {

enum class EventFormat { Csv, Jsonl };

/// .jsonl selects JSONL, anything else CSV.
EventFormat format_for_path(const std::filesystem::path& path);

/// CSV: header line `index,theta,outcome`, angles with 17 significant digits.
/// JSONL: one {"index":..,"theta":..,"outcome":..} object per line.
void write_events(std::ostream& out, std::span<const PhotonEvent> events, EventFormat format);

/// Reads events in file order. Blank lines and lines starting with '#' are
/// skipped, as is a CSV header. Outcome encodings: 1, +1 -> +1; -1, 0 -> -1.
/// Throws DataError (with the line number) on malformed lines or empty input.
std::vector<PhotonEvent> read_events(std::istream& in, EventFormat format);

/// Format guessed from the first significant character ('{' means JSONL).
std::vector<PhotonEvent> read_events(std::istream& in);

}  // namespace qneq::cli

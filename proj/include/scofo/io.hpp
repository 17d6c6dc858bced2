#pragma once

#include <filesystem>
#include <vector>

#include "scofo/forward.hpp"
#include "scofo/simulate.hpp"

namespace scofo {

// Trace JSONL: one line per frame, { t, time_s, event, bottom, gap, suspended }.
void save_trace_jsonl(const std::filesystem::path& path, const AlignmentTrace& trace);
AlignmentTrace load_trace_jsonl(const std::filesystem::path& path, double hop_s);

// Ground truth: a { "jumps": [...] } header line followed by one
// { t, event } line per frame.
void save_truth_jsonl(const std::filesystem::path& path, const GroundTruth& truth);
GroundTruth load_truth_jsonl(const std::filesystem::path& path, double hop_s);

// Feature dump, one frame per row. ".csv" writes t,time_s,v0..; anything
// else writes JSONL { t, time_s, values }.
void save_features(const std::filesystem::path& path,
                   const std::vector<FeatureFrame>& frames);
std::vector<FeatureFrame> load_features(const std::filesystem::path& path);

FeatureFrame feature_frame_from_json_line(const std::string& line, int fallback_t);

// Performance JSON: the note list plus the rates/seed provenance block.
void save_performance(const std::filesystem::path& path,
                      const std::vector<PerformedNote>& perf,
                      const ErrorRates& rates, std::uint64_t seed);
std::vector<PerformedNote> load_performance(const std::filesystem::path& path);

// Labeled training frames, JSONL { pitch, values }.
std::vector<std::pair<int, FeatureFrame>> load_labeled_features(
    const std::filesystem::path& path);
void save_labeled_features(const std::filesystem::path& path,
                           std::span<const std::pair<int, FeatureFrame>> labeled);

}  // namespace scofo

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "vrturn/features.hpp"
#include "vrturn/speech.hpp"

namespace vrturn {

enum class Task { TurnVsContinue, NextSpeaker, Timing };

/// "turn", "next", "timing"
std::string_view to_string(Task task);
Task parse_task(std::string_view name);

/// Candidates that never became rows, by reason.
struct SkipReport {
  std::size_t invalid_window = 0;     // window out of range or too sparse
  std::size_t no_reference = 0;       // no earlier main speaker, or ref == main
  std::size_t intervening_speech = 0; // timing negatives rejected by the speech filter
  std::size_t duplicate = 0;

  bool operator==(const SkipReport&) const = default;
};

struct LabeledDataset {
  Task task = Task::NextSpeaker;
  std::uint64_t seed = 0;
  FeatureSchema schema;
  std::vector<FeatureVector> rows;
  std::vector<int> labels;
  std::size_t candidate_positives = 0;
  std::size_t candidate_negatives = 0;
  SkipReport skipped;

  std::size_t size() const { return rows.size(); }
  std::size_t positives() const;
  std::size_t negatives() const { return size() - positives(); }

  Eigen::MatrixXd matrix() const;
  Eigen::VectorXd label_vector() const;
  /// Same columns, selected rows.
  LabeledDataset subset(std::span<const std::size_t> indices) const;
};

struct DatasetConfig {
  LabelConfig labels;
  FeatureConfig features;
  std::vector<double> timing_offsets = {2, 4, 6, 8, 10, 12};
  int jobs = 1;
};

struct LabeledSession {
  const SessionRecording* recording = nullptr;
  SessionLabels labels;
};

std::vector<LabeledSession> label_sessions(std::span<const SessionRecording> recordings, const LabelConfig& cfg,
                                           int jobs = 1);

/// Clean onsets (main = new speaker) against continuing-speech onsets (main =
/// a random user other than the previous speaker).
LabeledDataset build_turn_vs_continue(std::span<const LabeledSession> sessions, std::uint64_t seed,
                                      const DatasetConfig& cfg = {});
/// Turn-taking onsets: the upcoming speaker against every user who is
/// neither upcoming nor previous speaker.
LabeledDataset build_next_speaker(std::span<const LabeledSession> sessions, std::uint64_t seed,
                                  const DatasetConfig& cfg = {});
/// Windows right before turn-taking onsets against earlier windows in which
/// the upcoming speaker stays silent until the onset.
LabeledDataset build_timing(std::span<const LabeledSession> sessions, std::uint64_t seed,
                            const DatasetConfig& cfg = {});

LabeledDataset build_dataset(Task task, std::span<const SessionRecording> recordings, std::uint64_t seed,
                             const DatasetConfig& cfg = {});
LabeledDataset build_dataset(Task task, std::span<const LabeledSession> sessions, std::uint64_t seed,
                             const DatasetConfig& cfg = {});

/// Keeps every row of the minority class and a uniform sample of the
/// majority. Row order is restored to the canonical sort afterwards.
void balance_classes(LabeledDataset& ds, std::uint64_t seed);

/// Canonical order: session, onset, main user, label.
void sort_rows(LabeledDataset& ds);

/// Wide CSV: a '#'-prefixed JSON header line, a column header, one row per
/// sample. config_hash is copied into the header when non-empty.
std::string dataset_to_csv(const LabeledDataset& ds, const std::string& config_hash = {});
LabeledDataset dataset_from_csv(std::string_view text, const FeatureSchema& schema);

std::filesystem::path schema_sidecar_path(const std::filesystem::path& dataset_path);
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path, const std::string& config_hash = {});
/// Reads the dataset and its schema sidecar; SchemaMismatch when they
/// disagree.
LabeledDataset load_dataset(const std::filesystem::path& path);

}  // namespace vrturn

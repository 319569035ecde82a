#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "rucca/features.hpp"
#include "rucca/tagger.hpp"
#include "rucca/training.hpp"

namespace rucca {

/// Everything needed to rebuild a GruTagger except the (external) word vectors,
/// which are identified by row count and fingerprint.
struct TaggerModel {
  FeatureVocabularies vocab;
  GruTaggerParams params;
  TrainConfig config;
  std::size_t embedding_rows = 0;
  std::uint64_t embedding_fingerprint = 0;

  friend bool operator==(const TaggerModel&, const TaggerModel&) = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary container: magic, version, a JSON metadata block (config and
/// vocabularies), then every tensor as name, shape and raw doubles.
void write_model(const TaggerModel& model, std::ostream& out);
TaggerModel read_model(std::istream& in);
void save_model(const TaggerModel& model, const std::filesystem::path& path);
/// Throws IoError, SchemaError on a corrupt file or ConfigError on a version mismatch.
TaggerModel load_model(const std::filesystem::path& path);

/// Throws ConfigError when `embeddings` are not the vectors the model was trained with.
void check_embeddings(const TaggerModel& model, const WordEmbeddingTable& embeddings);

}  // namespace rucca

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "revmetrics/retrieval/llm.hpp"
#include "revmetrics/snapshot/snapshot.hpp"

namespace revmetrics::extraction {

inline constexpr std::size_t kMaxChunkCodePoints = 400;

/// Whitespace tokens with leading/trailing punctuation removed; a token counts
/// when it consists of letters, optionally joined by hyphens. Tokens with
/// digits, apostrophes or other symbols are excluded ("don't stop" -> 1).
std::int64_t count_words(const std::string &text);

struct Chunk {
    std::string text;
    /// A single line longer than the chunk limit.
    bool oversized = false;
};

/// Greedy packing of newline-separated lines into chunks of at most 400 code
/// points. Joining the chunk texts with '\n' restores the input.
std::vector<Chunk> chunk_text(const std::string &text);

/// Chunks mentioning fig/figure/tab/table (optionally plural) as whole words,
/// case-insensitively.
std::vector<Chunk> filter_caption_chunks(const std::vector<Chunk> &chunks);

struct Captions {
    std::vector<std::string> figures;
    std::vector<std::string> tables;
};

/// One LLM call per chunk with a JSON reply {"figures": [...], "tables": [...]},
/// retried once when unparseable. Throws LlmUnavailable, MalformedResponse.
Captions extract_captions(const std::vector<Chunk> &chunks, retrieval::LlmClient &llm);

/// Judges the seven binary features. Each call sees only its routed inputs:
/// intro+TOC for taxonomy and prisma, TOC for preliminary/application/
/// discussion, captions for benchmark, abstract for structured_abstract.
/// Inputs with no text yield zeros without a call.
snapshot::FeatureVector extract_features(const std::string &title, const std::string &abstract,
                                         const std::string &intro, const std::vector<std::string> &toc,
                                         const Captions &captions, retrieval::LlmClient &llm);

struct KeywordPositions {
    std::string keyword;
    std::vector<double> positions;
};

/// Relative position i/(n-1) of every section title containing each keyword
/// (case-insensitive). Keywords are lowercased and deduplicated in order; a
/// single-section document contributes 0.
std::vector<KeywordPositions> section_positions(const std::vector<std::string> &section_titles,
                                                const std::vector<std::string> &keywords);

struct Section {
    std::string title;
    std::string body;
};

/// Pre-extracted review text. Ingest format (UTF-8):
///   # TITLE: <title>
///   # ABSTRACT
///   <abstract lines>
///   # TOC
///   <one entry per line>
///   # SECTION: <title>
///   <body lines>
struct StructuredDocument {
    std::string title;
    std::string abstract;
    std::vector<std::string> toc;
    std::vector<Section> sections;

    std::string body_text() const;
    /// Body of the first section titled like an introduction, else the first section.
    std::string introduction() const;
    std::vector<std::string> section_titles() const;
};

/// Throws ParseError for text outside any block.
StructuredDocument parse_structured_text(const std::string &text);

struct DocumentAnalysis {
    std::int64_t word_count = 0;
    std::size_t chunk_count = 0;
    std::size_t caption_chunk_count = 0;
    Captions captions;
    snapshot::FeatureVector features;
};

/// Word count, caption extraction and features for one document. An absent
/// TOC block falls back to the section titles.
DocumentAnalysis analyze_document(const StructuredDocument &doc, retrieval::LlmClient &llm);

/// Deterministic stand-ins for the caption and feature prompts, driven by cue
/// lists that the stub table may override under "feature_cues".
void register_stub_handlers(retrieval::StubLlmClient &stub);

} // namespace revmetrics::extraction

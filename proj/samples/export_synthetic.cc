// Copyright 2026 The Chronolink Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Writes a small drifting corpus, KB, vectors, QA pairs and a config file
// that the chronolink CLI can consume directly.
//
//   export_synthetic <out_dir> [seed]

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "chronolink/corpus_io.hpp"
#include "chronolink/embedding.hpp"
#include "chronolink/synthetic.hpp"
#include "chronolink/util/jsonl.hpp"

namespace {

using namespace chronolink;

absl::Status Export(const std::string& dir, std::uint64_t seed) {
  SynthConfig config;
  config.num_entities = 8;
  config.mentions_per_segment = 40;
  config.dim = 8;
  config.seed = seed;
  ASSIGN_OR_RETURN(SynthData data, MakeSyntheticCorpus(config));
  std::filesystem::create_directories(dir);
  const auto path = [&](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };

  // Segment s<t> becomes the two-month window starting May 2023 + 2t.
  std::map<std::string, std::string> date_of;
  for (const TimeSegment& s : data.corpus.segments) {
    char date[16];
    std::snprintf(date, sizeof(date), "2023-%02d-15", 5 + 2 * s.ordinal);
    date_of[s.label] = date;
  }
  std::string corpus;
  for (const auto& [id, doc] : data.corpus.documents) {
    corpus += Json{{"kind", "doc"}, {"doc_id", id}, {"text", doc.text},
                   {"date", date_of[doc.segment]}}.dump() + "\n";
  }
  for (const MentionRecord& m : data.corpus.mentions) {
    corpus += Json{{"kind", "mention"}, {"mention_id", m.mention_id},
                   {"doc_id", m.doc_id}, {"start", m.start}, {"end", m.end},
                   {"surface", m.surface},
                   {"gold_entity", *m.gold_entity}}.dump() + "\n";
  }
  RETURN_IF_ERROR(WriteTextFile(path("corpus.jsonl"), corpus));
  RETURN_IF_ERROR(WriteKb(data.catalog, path("kb.jsonl")));
  RETURN_IF_ERROR(WriteEmbeddingsJsonl(data.embeddings, path("embeddings.jsonl")));

  std::vector<QAPair> qa;
  EmbeddingStore qa_vectors;
  for (const MentionRecord& m : data.corpus.mentions) {
    const TimeSegment* seg = data.corpus.FindSegment(m.segment);
    if (seg->phase != Phase::kTest) continue;
    if (std::stoi(m.mention_id.substr(m.mention_id.size() - 3)) % 8 != 0) {
      continue;
    }
    const EntityRecord* e = data.catalog.Find(*m.gold_entity);
    QAPair p{StrCat("qa-", m.mention_id),
             StrCat("What was the news about ", m.surface, " today?"),
             m.surface, e->entity_id, StrCat("the ", e->name, " story"),
             m.segment, m.doc_id};
    if (CountOccurrences(p.question, p.mention) != 1) continue;
    RETURN_IF_ERROR(qa_vectors.Insert(
        NodeKind::kMention, p.qa_id,
        *data.embeddings.Find(NodeKind::kMention, m.mention_id), m.segment));
    qa.push_back(std::move(p));
  }
  RETURN_IF_ERROR(WriteQaPairs(qa, path("qa.jsonl")));
  RETURN_IF_ERROR(WriteEmbeddingsJsonl(qa_vectors, path("qa_embeddings.jsonl")));

  const std::string toml =
      "# Sample run over the exported synthetic data.\n"
      "seed = 0\n"
      "\n"
      "[paths]\n"
      "corpus = \"corpus.jsonl\"\n"
      "kb = \"kb.jsonl\"\n"
      "embeddings = \"embeddings.jsonl\"\n"
      "qa = \"qa.jsonl\"\n"
      "qa_embeddings = \"qa_embeddings.jsonl\"\n"
      "\n"
      "[corpus]\n"
      "window_start = \"2023-05-01\"\n"
      "window_end = \"2023-12-31\"\n"
      "months_per_segment = 2\n"
      "num_train = 2\n"
      "\n"
      "[trainer]\n"
      "alpha = 0.8\n"
      "epochs = 2\n"
      "k = 8\n"
      "\n"
      "[qa]\n"
      "chunk_chars = 200\n";
  return WriteTextFile(path("sample.toml"), toml);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: export_synthetic <out_dir> [seed]\n";
    return 2;
  }
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 0;
  const absl::Status s = Export(argv[1], seed);
  if (!s.ok()) {
    std::cerr << s << "\n";
    return 1;
  }
  return 0;
}

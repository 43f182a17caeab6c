#include "textmill/document.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace textmill {

std::optional<std::string> Document::meta_string(const std::string& key) const {
  if (!meta.is_object()) return std::nullopt;
  auto it = meta.find(key);
  if (it == meta.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

LanguageTag::LanguageTag(std::string code) : code_(std::move(code)) {
  if (code_.empty()) throw ConfigError("language tag must not be empty");
  for (char c : code_) {
    if (c >= 'A' && c <= 'Z') throw ConfigError("language tag must be lowercase: " + code_);
  }
}

Document parse_record(std::string_view line, const std::string& fallback_id) {
  Meta rec;
  try {
    rec = Meta::parse(line);
  } catch (const Meta::parse_error& e) {
    throw FormatError(std::string("malformed JSON record: ") + e.what());
  }
  if (!rec.is_object()) throw FormatError("record is not a JSON object");
  auto text = rec.find("text");
  if (text == rec.end() || !text->is_string()) throw FormatError("record lacks a string \"text\" field");

  Document doc;
  doc.text = text->get<std::string>();
  if (auto meta = rec.find("meta"); meta != rec.end() && !meta->is_null()) {
    if (!meta->is_object()) throw FormatError("\"meta\" must be an object");
    doc.meta = std::move(*meta);
  }
  if (auto id = rec.find("id"); id != rec.end() && !id->is_null()) {
    if (id->is_string())
      doc.id = id->get<std::string>();
    else if (id->is_number_integer())
      doc.id = id->dump();
    else
      throw FormatError("\"id\" must be a string or integer");
  } else {
    doc.id = fallback_id;
  }
  return doc;
}

std::string to_record(const Document& doc) {
  Meta rec = Meta::object();
  rec["id"] = doc.id;
  rec["text"] = doc.text;
  rec["meta"] = doc.meta.is_null() ? Meta::object() : doc.meta;
  return rec.dump(-1, ' ', false, Meta::error_handler_t::replace);
}

JsonlReader::JsonlReader(std::istream& in, std::string source_name, ErrorMode mode)
    : in_(in), source_(std::move(source_name)), mode_(mode) {}

std::optional<Document> JsonlReader::next() {
  while (std::getline(in_, buffer_)) {
    ++line_;
    if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
    if (buffer_.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      return parse_record(buffer_, source_ + ":" + std::to_string(line_));
    } catch (const FormatError& e) {
      if (mode_ == ErrorMode::fail_fast) throw FormatError(e.what(), line_);
      ++malformed_;
    }
  }
  return std::nullopt;
}

void JsonlWriter::write(const Document& doc) {
  const std::string rec = to_record(doc);
  out_.write(rec.data(), static_cast<std::streamsize>(rec.size()));
  out_.put('\n');
  if (!out_) throw IoError("write failed after " + std::to_string(written_) + " documents", written_);
  ++written_;
}

Dataset read_jsonl(std::istream& in, const std::string& source_name, ErrorMode mode,
                   std::size_t* malformed) {
  JsonlReader reader(in, source_name, mode);
  Dataset docs;
  while (auto doc = reader.next()) docs.push_back(std::move(*doc));
  if (malformed) *malformed = reader.malformed_count();
  return docs;
}

std::size_t write_jsonl(std::span<const Document> docs, std::ostream& out) {
  JsonlWriter writer(out);
  for (const auto& d : docs) writer.write(d);
  out.flush();
  if (!out) throw IoError("flush failed", writer.written());
  return writer.written();
}

std::string source_name_for(const std::string& path) {
  if (path == "-") return "stdin";
  std::filesystem::path p(path);
  std::string stem = p.stem().string();
  return stem.empty() ? path : stem;
}

Dataset read_jsonl_file(const std::string& path, ErrorMode mode, std::size_t* malformed) {
  if (path == "-") return read_jsonl(std::cin, "stdin", mode, malformed);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_jsonl(in, source_name_for(path), mode, malformed);
}

std::size_t write_jsonl_file(std::span<const Document> docs, const std::string& path) {
  if (path == "-") return write_jsonl(docs, std::cout);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return write_jsonl(docs, out);
}

}  // namespace textmill

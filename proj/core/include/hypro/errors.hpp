#pragma once

#include <stdexcept>
#include <string>

namespace hypro {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// dataset_io
class MissingFile : public Error {
 public:
  explicit MissingFile(const std::string& path) : Error("missing file: " + path), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

class ImageDecodeError : public Error {
 public:
  using Error::Error;
};

// retriever
class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("retrieval corpus is empty") {}
};

class EmbeddingUnavailable : public Error {
 public:
  using Error::Error;
};

// llm_client
class LlmError : public Error {
 public:
  using Error::Error;
};

class CacheMiss : public LlmError {
 public:
  explicit CacheMiss(const std::string& key) : LlmError("transcript cache miss for key " + key), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class ProviderError : public LlmError {
 public:
  enum class Kind { http_status, invalid_attachment, missing_api_key, malformed_response, transport };

  ProviderError(Kind kind, int status, std::string body, const std::string& what)
      : LlmError(what), kind_(kind), status_(status), body_(std::move(body)) {}

  Kind kind() const { return kind_; }
  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  Kind kind_;
  int status_;
  std::string body_;
};

class Timeout : public LlmError {
 public:
  using LlmError::LlmError;
};

// pipeline
class EmptyGeneration : public Error {
 public:
  EmptyGeneration() : Error("the model returned no program") {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hypro

/*
 * Copyright 2026 The Doris Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include "doris/providers.hpp"
#include "doris/templates.hpp"

using namespace doris;

namespace {
const std::string kDir = DORIS_TEMPLATES_DIR;
}

TEST(Templates, ShippedFilesChecksums) {
  EXPECT_EQ(sha256_hex(read_file(kDir + "/symptoms.txt")),
            "35f5b122afab4261823cb891b2f918b2ed327e9823b54a74452c88e36a780aeb");
  EXPECT_EQ(sha256_hex(read_file(kDir + "/emotions.txt")),
            "69996aaa860cb69fa033d406392798afc08e6e294c5c05ae0f257a99dd57663f");
}

TEST(Templates, BuiltinMatchesFiles) {
  EXPECT_EQ(std::string(kBuiltinSymptomTemplates), read_file(kDir + "/symptoms.txt"));
  EXPECT_EQ(std::string(kBuiltinEmotionTemplates), read_file(kDir + "/emotions.txt"));
  const auto a = TemplateRegistry::builtin();
  const auto b = TemplateRegistry::from_directory(kDir);
  EXPECT_EQ(a.symptoms_digest(), b.symptoms_digest());
  ASSERT_EQ(a.symptoms().size(), 9u);
  ASSERT_EQ(a.emotions().size(), 5u);
  EXPECT_TRUE(a.symptoms()[8].text.starts_with("I have a desire for death"));
  EXPECT_EQ(a.symptoms()[0].title, "Depressed mood");
}

TEST(Templates, Validation) {
  EXPECT_THROW(TemplateRegistry::from_strings("[A] x\ntext\n", kBuiltinEmotionTemplates), ValidationError);
  std::string swapped(kBuiltinSymptomTemplates);
  swapped.replace(swapped.find("[B]"), 3, "[Z]");
  EXPECT_THROW(TemplateRegistry::from_strings(swapped, kBuiltinEmotionTemplates), ValidationError);
}

TEST(Templates, EmbedOnce) {
  HashingEncoder enc(64, 1);
  const auto reg = TemplateRegistry::builtin().embed(enc);
  ASSERT_EQ(reg.symptom_embeddings().size(), 9u);
  ASSERT_EQ(reg.emotion_embeddings().size(), 5u);
  for (const auto& e : reg.symptom_embeddings()) EXPECT_NEAR(l2_norm(e.values), 1.0, 1e-12);
}

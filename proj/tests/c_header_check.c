// Copyright 2026 The tubargain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/* The public header must compile as plain C. */
#include <stdio.h>

#include "tubargain/tubargain.h"

int main(void) {
  const double v[] = {0, 0, 1};
  int nonempty = 0;
  tub_status st = tub_core_is_nonempty(2, v, &nonempty, NULL);
  if (st != TUB_OK || nonempty != 1) {
    fprintf(stderr, "unexpected: %s\n", tub_last_error());
    return 1;
  }
  return 0;
}

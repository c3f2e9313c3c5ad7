/** Browser entry: mount the workbench onto the static shell. */

import { startWorkbench } from "./app.js";

const root = document.getElementById("app");
if (root) {
  // default actor for an interactive session; mutations still co-sign explicitly
  void startWorkbench(root, {
    role: "self_perception_coordinator",
    name: "Alex Chen",
  });
}

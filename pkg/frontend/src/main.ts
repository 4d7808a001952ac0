import { initApp } from "./app";
import "./style.css";

const root = document.getElementById("app");
if (root) {
  // same-origin by default: the Python service mounts the built assets
  initApp(root, window.location.origin.replace(/\/$/, ""));
}
